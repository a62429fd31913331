# See LICENSE.txt for license details.

import os
from setuptools import setup, find_packages

base_dir = os.path.dirname(__file__)

setup(
    name='dune_edges',
    version='1.0.0.dev1',
    license='MIT',
    description=(
        "Edge overlays and displacement measurement for pairs of "
        "satellite images of the same terrain."
    ),
    long_description=open(os.path.join(base_dir, 'README.rst')).read(),
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Image Processing',
    ],
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    zip_safe=False,
    python_requires=">=3.11",
    install_requires=(
        'numpy>=1.22',
        'scipy>=1.8',
        'Pillow>=9',
    ),
    entry_points={
        'console_scripts': [
            'dune-edges = dune_edges.cli:main',
        ],
    },
    extras_require=dict(
        test=[
            'pytest',
            'pytest-cov',
            'sybil',
            'testfixtures',
        ],
        build=[
            'setuptools',
            'setuptools-git',
            'wheel',
            'twine',
        ],
        docs=[
            'sphinx',
            'furo',
        ],
    ),
)
