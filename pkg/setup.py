#!/usr/bin/env python

"""The setup script."""

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = ['numpy>=1.24', 'scipy>=1.10', 'pandas>=2.0', 'click>=8.0', 'tqdm>=4.60', ]

test_requirements = ['pytest>=6', 'hypothesis>=6', ]

setup(
    author="Rick McGeer",
    author_email='rick.mcgeer@engageLively.com',
    python_requires='>=3.9',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    description="Numerical verification of conformal-Killing 2-forms on quaternionic projective space "
                "and of the Obata equation on its twistor space",
    entry_points={
        'console_scripts': [
            'qkverify=qkverify.cli:main',
        ],
    },
    install_requires=requirements,
    license="BSD license",
    long_description=readme + '\n\n' + history,
    include_package_data=True,
    keywords='qkverify',
    name='qkverify',
    packages=find_packages(include=['qkgeometry', 'qkgeometry.*', 'qkverify', 'qkverify.*']),
    test_suite='tests',
    tests_require=test_requirements,
    url='https://github.com/rickmcgeer/qkverify',
    version='0.1.0',
    zip_safe=False,
)
