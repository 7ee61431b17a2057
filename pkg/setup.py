"""
Setup script for the censored expectile regression package
"""
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="censored-expectile-nn",
    version="1.0.0",
    description="Data-augmented expectile regression neural networks for censored data",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "python-dotenv>=1.0.0",
        "pydantic>=2.0.0",
        "typing-extensions>=4.5.0",
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "scikit-learn>=1.1.0",
        "pandas>=1.4.0",
        "joblib>=1.2.0",
        "tqdm>=4.64.0",
    ],
    entry_points={
        "console_scripts": [
            "daernn=main:main",
        ],
    },
)
