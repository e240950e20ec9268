from setuptools import setup, find_packages

with open("requirements.txt") as f:
	install_requires = f.read().strip().split("\n")

# get version from __version__ variable in fedpower/__init__.py
from fedpower import __version__ as version

setup(
	name="fedpower",
	version=version,
	description="Differentially private federated LoRA simulator with PowerDP refactorization",
	author="FedPower",
	author_email="fedpower@example.org",
	packages=find_packages(),
	zip_safe=False,
	include_package_data=True,
	install_requires=install_requires,
	entry_points={
		"console_scripts": ["fedpower=fedpower.api.cli:main"],
	},
)
