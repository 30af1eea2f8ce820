from setuptools import setup, find_packages

setup(
    name="qfm_fingerprint",
    version="0.1.0",
    description="Fourier fingerprints and FCC of quantum Fourier models",
    packages=find_packages("src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.21",  # Statevector simulation, FFT, statistics
        "scipy>=1.7",  # Exact binomials, relative entropy, Huber
        "scikit-learn>=1.0",  # Quantile and MinMax transforms
        "pandas>=1.3",  # Result tables and event CSVs
        "matplotlib>=3.5",  # SVG heatmaps
        "psutil",  # Process memory in the benchmark
    ],
    extras_require={
        "test": ["pytest>=7"],
    },
    entry_points={
        "console_scripts": [
            "qfm-fingerprint=qfm_fingerprint.cli:main",
        ],
    },
    python_requires=">=3.8",
)
