from setuptools import setup, find_packages

setup(
    name="gaussian-l1-lab",
    version="0.1.0",
    package_dir={"": "src"},  # 告诉 setuptools src 目录包含包
    packages=find_packages(where="src"),  # 在 src 目录下查找包
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.9",
        "python-dotenv",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        'console_scripts': [
            'l1lab=main:main',  # 因为 src 是包的根目录，所以这里不需要 src. 前缀
        ],
    }
)
