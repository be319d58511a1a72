"""Composable top-K data discovery over an indexed CSV lake.

The usual flow: build an index over a directory of CSV files once, then
compose seekers (sc / keyword / mc / corr) and combiners (intersection,
union, difference, counter) into plans and run them.

    import blend

    blend.build_index("lake/", "idx/")
    index = blend.Index("idx/")

    plan = blend.Plan()
    plan.add("input", blend.Input())
    plan.add("query", blend.Seekers.SC(["berlin", "paris"], k=10), ["input"])
    plan.add("terminal", blend.Terminal(), ["query"])
    for hit in plan.run(index):
        print(hit["table_path"], hit["score"])
"""

from ._core import (
    Combiners,
    Element,
    Index,
    IndexStoreError,
    Input,
    Plan,
    PlanError,
    SeekerError,
    Seekers,
    Terminal,
    augmentation_plan,
    build_index,
    corr_plan,
    join_plan,
    mc_join_plan,
    union_plan,
)

__all__ = [
    "Combiners",
    "Element",
    "Index",
    "IndexStoreError",
    "Input",
    "Plan",
    "PlanError",
    "SeekerError",
    "Seekers",
    "Terminal",
    "augmentation_plan",
    "build_index",
    "corr_plan",
    "join_plan",
    "mc_join_plan",
    "union_plan",
]
