"""Shared enumeration of near-maximal pieces built from per-slot choices."""

from __future__ import annotations

from ..errors import ActiveSetOverflowError


def budgeted_choice_product(slot_options, budget, cap):
    """Combinations of one choice per slot whose deficiencies sum to <= budget.

    `slot_options[s]` lists (deficiency, choice) pairs for slot s, each
    deficiency >= 0 with at least one zero per slot. Slots with a single
    affordable option are fixed up front; the remaining free slots are
    expanded depth-first with the running budget, raising
    ActiveSetOverflowError past `cap` results.
    """
    affordable = []
    for options in slot_options:
        opts = sorted(
            ((d, c) for d, c in options if d <= budget), key=lambda t: t[0]
        )
        if not opts:
            raise ValueError("a slot has no affordable option; budget too small")
        affordable.append(opts)

    results = []
    stack = [(0, budget, ())]
    n_slots = len(affordable)
    while stack:
        slot, left, chosen = stack.pop()
        if slot == n_slots:
            results.append(chosen)
            if len(results) > cap:
                raise ActiveSetOverflowError(
                    f"more than {cap} near-maximal pieces",
                    cap=cap,
                    count=len(results),
                )
            continue
        for d, c in reversed(affordable[slot]):
            if d <= left:
                stack.append((slot + 1, left - d, chosen + (c,)))
    return results
