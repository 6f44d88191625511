# setup.py

from setuptools import setup, find_packages

with open("README.md", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="tschains",
    version="0.1.0",
    description="Discover, rank and evaluate evolving-pattern chains in time series",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    packages=find_packages(exclude=("tests",)),
    install_requires=[
        "numpy>=1.22",
        "pandas>=1.5",
        "psutil",
        "tqdm>=4.60",
    ],
    entry_points={
        "console_scripts": [
            "tschains=tschains.core:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
)
