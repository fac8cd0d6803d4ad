"""Measure the speed of a logistic damage front and compare it against the
pulled-front prediction 2*sqrt(d1*rate) (m/s).

Runs the shipped kpp_front scenario, tracks the half-maximum crossing of
the damage field through the snapshot sequence, fits the late-time front
trajectory, and prints the measured speed, the fit quality, and the
diffusion-time metrics (tau = d1/v_f^2, delta1 = d1/v_f).

Usage: python demos/front_speed.py [--scenario PATH]
"""

import argparse
import math
import os

import failwave as fw

HERE = os.path.dirname(os.path.abspath(__file__))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--scenario",
        default=os.path.join(HERE, "..", "scenarios", "kpp_front.yaml"),
        help="scenario yaml to run (default: shipped kpp_front)",
    )
    args = ap.parse_args()

    with open(args.scenario) as fh:
        cfg = fw.build_scenario(fh.read())
    p = cfg.material
    if p.source_law != "logistic":
        raise SystemExit("front_speed expects a logistic-source scenario")

    print(f"running {cfg.name}: nx={cfg.grid.nx}, dt={cfg.dt} s, t_end={cfg.t_end} s")
    res = fw.run(cfg)

    track = fw.track_front(res.snapshots, cfg.grid, level=0.5, gamma_max=p.gamma_max)
    v_pred = 2.0 * math.sqrt(p.d1 * p.source_rate)
    metrics = fw.wave_metrics(res, cfg)

    print()
    print(f"front positions tracked at {len(track.times)} snapshot times")
    print(f"measured front speed   v_f = {track.v_f:.4f} m/s  (fit R^2 = {track.fit_r2:.6f})")
    print(f"pulled-front reference 2 sqrt(d1 r) = {v_pred:.4f} m/s")
    print(f"slowdown vs reference: {100.0 * (1.0 - track.v_f / v_pred):.1f}% "
          "(finite-time transient; the front approaches the reference from below)")
    print()
    print(f"diffusion time    d1/v_f^2 = {fw.predict_tau(p.d1, track.v_f):.4f} s")
    print(f"diffusion length  delta1 = d1/v_f = {metrics.delta1:.4f} m")
    if metrics.tau == metrics.tau:  # gauge present and settled
        print(f"gauge 10-90 rise time at X={cfg.gauges[0]} m: {metrics.tau:.4f} s "
              "(front passage through a point, wider than d1/v_f^2)")


if __name__ == "__main__":
    main()
