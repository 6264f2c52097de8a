"""Training kernel selection.

Uses the compiled Cython kernel when the extension built, otherwise the
numpy fallback. Set ONTOLABEL_PURE_PYTHON=1 to force the fallback (used by
the equivalence tests and the benchmark).
"""

import os

if os.environ.get("ONTOLABEL_PURE_PYTHON"):
    from ._pure import BACKEND_NAME, sgd_epoch_dense, sgd_epoch_sparse
else:
    try:
        from ._fast import BACKEND_NAME, sgd_epoch_dense, sgd_epoch_sparse
    except ImportError:
        from ._pure import BACKEND_NAME, sgd_epoch_dense, sgd_epoch_sparse

__all__ = ["BACKEND_NAME", "sgd_epoch_dense", "sgd_epoch_sparse"]
