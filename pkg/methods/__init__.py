"""
Pluggable expectile estimators
"""
