from setuptools import setup, find_packages

setup(
    name="mcnn-consolidation",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "python-dotenv>=1.0.0",
        "pandas>=2.0.0",
        "numpy>=1.24.0",
        "pytest>=7.4.0",
        "pytest-cov>=4.1.0",
        "pytest-mock>=3.14.0",
    ],
    entry_points={
        "console_scripts": [
            "mcnn=src.scripts.mcnn:main",
        ],
    },
    python_requires=">=3.8",
    description="Multi-constitutive neural network solver for large-strain consolidation",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
)
