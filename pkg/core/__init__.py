"""Numerical core: expectiles, networks, censoring, augmentation and evaluation"""
