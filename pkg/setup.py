#!/usr/bin/env python

from setuptools import find_packages, setup

README_FILE = open('README.rst')
try:
    long_description = README_FILE.read()
finally:
    README_FILE.close()

setup(name='hyperslender',
        version='0.1.0',
        packages=find_packages('src'),
        package_dir = {'': 'src',},
        include_package_data=True,
        zip_safe=False,
        platforms=['any'],
        description='Measure solutions of hypersonic flow past slender wedges and cones',
        author_email='kaleissin@gmail.com',
        author='kaleissin',
        long_description=long_description,
        install_requires=[
                'numpy>=1.17',
                'scipy>=1.4',
        ],
        entry_points={
                'console_scripts': [
                        'hyperslender = hyperslender.cli:main',
                ],
        },
        classifiers=[
                'Development Status :: 3 - Alpha',
                'Environment :: Console',
                'Intended Audience :: Science/Research',
                'License :: OSI Approved :: MIT License',
                'Operating System :: OS Independent',
                'Programming Language :: Python',
                'Programming Language :: Python :: 3',
                'Topic :: Scientific/Engineering :: Physics',
                'Topic :: Scientific/Engineering :: Mathematics',
        ]
)
