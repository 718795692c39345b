try:
    from . import _lpcart as _impl
except ImportError:  # built-tree layout: the module sits directly on PYTHONPATH
    import _lpcart as _impl

__all__ = [
    "Dataset",
    "EtaModel",
    "Forest",
    "NodeStats",
    "PolicyReport",
    "Tree",
    "cart_split",
    "dgp_names",
    "dominates",
    "eta_model",
    "eta_model_names",
    "fit_forest",
    "g_cart",
    "g_star",
    "grow_tree",
    "grow_tree_kd",
    "mdfs_estimate",
    "mdfs_split",
    "midpoint_residual",
    "mr",
    "node_means",
    "node_stats",
    "pfs_split",
    "policy_report",
    "predict",
    "predict_proba",
    "risk",
    "sample_dgp",
    "tree_from_json",
]

for _name in __all__:
    globals()[_name] = getattr(_impl, _name)
del _name
