"""Step the postorder traversal of the six-node sample tree and print each epoch.

    python scripts/sample_tree_walkthrough.py [--order pre|post]
"""

import argparse

from trees.apps import SAMPLE_NAMES, SAMPLE_TREE, traversal_program
from trees.metrics import space_bounds
from trees.program import run_program


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--order", choices=("pre", "post"), default="post")
    args = ap.parse_args()

    r = run_program(traversal_program(SAMPLE_TREE, args.order), record_slots=True)
    print(f"{'E':>2} {'CEN':>3} {'range':>8} {'run':>3} {'valid':>5} {'fork':>4} {'nfc':>4}  tasks")
    for t in r.traces:
        tasks = " ".join(
            f"{name}({SAMPLE_NAMES[a[0]] if a and a[0] >= 0 else '-'})" for _, name, a in sorted(t.slots)
        )
        rng = f"[{t.ndrange.lo},{t.ndrange.hi}]"
        print(
            f"{t.epoch_index:>2} {t.cen:>3} {rng:>8} {t.launched:>3} {t.valid_executed:>5} "
            f"{t.forked:>4} {t.next_free_core_after:>4}  {tasks}"
        )
    m = r.metrics
    print()
    print("visit order:", "".join(SAMPLE_NAMES[v] for v in r.value))
    print(f"work={m.work_tasks} launched={m.launched_total} utilization={m.utilization:.2f}")
    print(f"critical path={m.critical_path} peak slots={m.peak_next_free_core} bounds={space_bounds(m)}")


if __name__ == "__main__":
    main()
