"""Hardware clocks under bounded drift.

Builds the three drift-schedule flavors and shows how hardware time
diverges from real time while staying inside the admissible envelope.
"""

import numpy as np

from gradsync import HardwareClock, make_drift_schedule

BOUND = 0.1
HORIZON = 10.0

flavors = {
    "ideal (drift 0)": make_drift_schedule("constant", BOUND, horizon=HORIZON),
    "fast extreme (+bound)": make_drift_schedule(
        "adversarial_extreme", BOUND, horizon=HORIZON, sign=1
    ),
    "slow extreme (-bound)": make_drift_schedule(
        "adversarial_extreme", BOUND, horizon=HORIZON, sign=-1
    ),
    "random walk (dwell 2)": make_drift_schedule(
        "piecewise_random", BOUND, horizon=HORIZON, dwell=2.0, seed=42
    ),
}

times = np.linspace(0.0, HORIZON, 6)
print(f"drift bound {BOUND}, horizon {HORIZON}")
print()
header = "real time:      " + "".join(f"{t:>9.1f}" for t in times)
print(header)
for name, schedule in flavors.items():
    clock = HardwareClock(schedule)
    values = clock.hardware_time(times)
    print(f"{name:<16}" + "".join(f"{v:>9.3f}" for v in values))

print()
print("every increment stays within [(1-bound)*dt, (1+bound)*dt]:")
clock = HardwareClock(flavors["random walk (dwell 2)"])
for lo, hi in zip(times, times[1:]):
    gain = clock.hardware_time(hi) - clock.hardware_time(lo)
    span = hi - lo
    print(
        f"  H({hi:4.1f}) - H({lo:4.1f}) = {gain:.4f}  "
        f"in [{(1-BOUND)*span:.2f}, {(1+BOUND)*span:.2f}]"
    )
