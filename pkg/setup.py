"""
This file is automatically generated by autosetup.py
Please edit the marked area only. Other areas will be
overwritten when autosetup is reruns.
"""

from setuptools import setup

params = dict(
    name='mirrorpark',
    description='Mirror target parking motion planner with sweep evaluation',
    version='0.1.0',
    install_requires=['PyYAML', 'matplotlib', 'numpy', 'pandas', 'pytest', 'scipy', 'shapely'],
    packages=['mirrorpark', 'mirrorpark.dynamics', 'mirrorpark.evaluate', 'mirrorpark.planner',
              'mirrorpark.scenario', 'mirrorpark.solvers', 'mirrorpark.test', 'mirrorpark.utils'],
    data_files=[],
    py_modules=[],
    include_package_data=True,
    scripts=None)

########## EDIT BELOW THIS LINE ONLY ##########

params["entry_points"] = dict(console_scripts=["mirrorpark = mirrorpark.cli:main"])

# example run configuration and logging setup
params["package_data"] = dict(mirrorpark=["config.example.yaml", "logging.yaml"])

########## EDIT ABOVE THIS LINE ONLY ##########

setup(**params)
