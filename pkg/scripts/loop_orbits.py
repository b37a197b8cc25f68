"""Where the 2x2 loop start goes under each eigenvector sign convention."""
import numpy as np

from eigenflow.dynamics import TrajectoryConfig, run_trajectory
from eigenflow.oracles import loop_pair

a, _ = loop_pair()
for pivot in ("last", "max", "native"):
    traj = run_trajectory(a, config=TrajectoryConfig(pivot=pivot, max_iters=500))
    m = traj.last.metrics
    print(f"pivot={pivot:<6} {traj.final_status.value:<9} after {traj.iterations:>3} iterations, "
          f"det={m.det_gram:.6f} frob_dev={m.frob_dev:.3e}")
    if traj.cycle:
        lag = traj.cycle.iter - traj.cycle.matched_iter
        x = traj.final_matrix.real
        angle = np.arctan2(x[1, 1], x[0, 1])
        print(f"  period {lag}; second column angle {angle / np.pi:+.6f} pi")
