# __init__.py for root directory
"""
Censored expectile regression
Data-augmented expectile regression networks for censored responses, with baselines and a simulation harness
"""

__version__ = "1.0.0"
