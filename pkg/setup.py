from setuptools import setup

setup(
    name='eigencent',
    version='0.1.0',
    description='Eigen-centrality attention with a constant-memory analytic backward pass',
    long_description='See README.md.',
    author='The eigencent Authors',
    entry_points={
        'console_scripts': [
            'eigencent = eigencent.centrality.cli:run',
        ],
    },
    include_package_data=True,
    package_data={
        'eigencent': ['static/*.json'],
    },
    packages=[
        'eigencent',
        'eigencent.centrality',
    ],
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
    ],
)
