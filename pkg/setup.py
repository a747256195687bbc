from setuptools import setup, find_packages

setup(
   name='librate',
   version='1.0',
   description='Validated numerics for computer-assisted proofs in the planar circular restricted three-body problem',
   author='Microsoft Corporation',
   author_email='robotics@microsoft.com',
   package_dir={'': 'src'},
   packages=find_packages(where='src'),
   package_data={
      'librate_samples': ['*.json'],
      'librate.library': ['*/*.md'],
   },
   install_requires=['numpy>=2.0.1', 'scipy>=1.13', 'mpmath>=1.3', 'python-dotenv>=1.0.1'],
   entry_points={'console_scripts': ['librate=librate.runner:main']}
)
