__all__ = [
    "grammar",
    "analysis",
    "epsilon",
    "unary",
    "transform",
    "stats",
    "trees",
    "treetransform",
    "estimate",
    "parser",
    "oracle",
    "treebank",
    "eval",
    "cli",
]
