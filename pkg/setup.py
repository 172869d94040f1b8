from setuptools import setup, find_packages

setup(
    name="heritage-sense",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        # Requirements are already in requirements.txt
        "python-dotenv",
        "pydantic>=1.9.0,<2.0.0",
        "loguru",
        "tenacity",
        "pytz",
        "numpy",
        "pandas",
        "matplotlib",
        "simpy",
    ],
    entry_points={
        "console_scripts": [
            "heritage-sense=src.scripts.cli:main",
        ],
    },
)
