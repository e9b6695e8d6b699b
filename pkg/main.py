"""
Main entry point for wavefront-kdv
Demonstrates usage with the built-in data
"""
import logging

from analyzer import WavefrontAnalyzer
from config.loader import build_config
from config.logging_setup import setup_logging

setup_logging()
logger = logging.getLogger(__name__)


def main():
    """Run example classifications"""
    print("=== wavefront-kdv: wave front sets of linearized KdV ===\n")

    # Example runs
    test_cases = [
        {
            "config": {"data": {"kind": "gaussian"}},
            "description": "Smooth Gaussian datum at t0 = 0 (expect Regular)"
        },
        {
            "config": {"data": {"kind": "jump_gaussian"}},
            "description": "Jump datum H(x) exp(-x^2) at t0 = 0 (expect Singular at x = 0)"
        },
        {
            "config": {"data": {"kind": "jump_gaussian"}, "detector": {"t0": 0.3}},
            "description": "Jump datum after free flow to t0 = 0.3 (expect Regular: dispersive smoothing)"
        },
        {
            "config": {"data": {"kind": "backward_evolved_jump", "t_sched": 0.3}, "detector": {"t0": 0.3}},
            "description": "Singularity scheduled to form at t0 = 0.3 (expect Singular at x = 0)"
        },
    ]

    print("Running example detections:\n")
    print("=" * 80)

    threshold = None
    for i, test in enumerate(test_cases, 1):
        print(f"\n[Example {i}] {test['description']}")
        analyzer = WavefrontAnalyzer(build_config(test["config"]), threshold=threshold)
        result = analyzer.detect(f"output/example_{i}")
        threshold = analyzer.threshold()

        for record in result["records"]:
            print(f"  ({record['x0']:+.1f}, {record['xi0']:+.1f}): "
                  f"criterion (i) {record['class_i']:<13} N={record['exponent_i']:.3g}   "
                  f"criterion (ii) {record['class_ii']:<13} N={record['exponent_ii']:.3g}")
        print("-" * 80)

    print(f"\nThreshold used: N_thr={threshold.n_thr:.3g}, margin={threshold.margin:.3g}")
    print("\n" + "=" * 80)
    print("Done. Sweep CSVs and report.json files are under output/.")


if __name__ == "__main__":
    main()
