"""Setup script for heavy-tail-bandits."""

import os

from setuptools import find_packages, setup

HERE = os.path.abspath(os.path.dirname(__file__))


def read(*parts):
    with open(os.path.join(HERE, *parts), encoding='utf-8') as f:
        return f.read()


setup(
    name="heavy-tail-bandits",
    version=read('heavy_tail_bandits', 'VERSION').strip(),
    description="UCB policies built on clipped-SGD for multi-armed bandits with heavy-tailed rewards",
    long_description=read('README.md'),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    package_data={'heavy_tail_bandits': ['VERSION']},
    python_requires=">=3.8",
    install_requires=[
        "pyyaml>=6.0",
        "rich>=13.0.0",
        "numpy>=1.22.0",
        "scipy>=1.8.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "black>=22.0.0",
            "flake8>=5.0.0",
            "mypy>=1.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "heavy-tail-bandits=heavy_tail_bandits.cli:main",
            "htb=heavy_tail_bandits.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
    ],
    keywords="multi-armed bandits, ucb, heavy tails, clipped sgd, median of means, benchmark",
)
