from setuptools import setup, find_packages

setup(
    name='quditctl',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    install_requires=[
        'numpy',
        'scipy',
        'pint',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    entry_points={
        'console_scripts': ['quditctl=cli.main:main'],
    },
)
