from setuptools import setup

long_description = '''
cbam_ge evaluates carbon border adjustments in a multi-country, multi-sector general
equilibrium model with input-output linkages and carbon markets: calibrate from
input-output and emissions data, solve counterfactuals in relative changes, and
report embodied emissions, trade patterns, leakage and welfare.

cbam_ge is compatible with Python 3.8 and above and is distributed with
the Apache 2.0 License.
'''

setup(
    name='cbam_ge',
    version='24.6.0',
    description='Carbon border adjustments in a multi-country, multi-sector general equilibrium model',
    long_description=long_description,
    license='Apache License Version 2.0',
    author='cbam_ge contributors',
    packages=['cbam_ge', 'cbam_ge_examples'],
    keywords=['cbam', 'carbon border adjustment', 'general equilibrium', 'input-output', 'hat algebra'],
    install_requires=['logbook>=1.5.2', 'numpy>=1.21', 'scipy>=1.7', 'pandas>=1.5'],
    test_suite="tests",
    entry_points={
        'console_scripts': [
            'cbam_ge = cbam_ge.cli:main',
            'cbam_ge_steady_state = cbam_ge_examples.steady_state:main',
            'cbam_ge_cbam_scenarios = cbam_ge_examples.cbam_scenarios:main',
            'cbam_ge_counterfactual_sweeps = cbam_ge_examples.counterfactual_sweeps:main',
            'cbam_ge_comparative_statics = cbam_ge_examples.comparative_statics:main'
        ]
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8'
)
