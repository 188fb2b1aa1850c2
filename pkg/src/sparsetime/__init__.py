import os

# 单线程 BLAS：训练与计时结果需逐字节可复现
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

__all__ = ["__version__"]

__version__ = "0.1.0"
