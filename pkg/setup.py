from __future__ import annotations

from setuptools import setup
import sys

for arg in sys.argv:
    if arg in ("upload", "register"):
        print("This setup is not designed to be uploaded or registered.")
        sys.exit(-1)

setup(
    name="rpforest",
    version="0.1.0",
    author="OSi",
    author_email="ondrej.sienczak@gmail.com",
    description="Random planted forest regression with ANOVA component purification",
    packages=[
        "rpforest",
        "rpforest.core",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.22",
        "pandas>=1.4",
        "scikit-learn>=1.1",
        "joblib>=1.1",
    ],
    extras_require={"test": ["pytest>=7"]},
    entry_points={
        "console_scripts": [
            "rpforest=rpforest.cli:main",
        ],
    },
    zip_safe=False,
)
