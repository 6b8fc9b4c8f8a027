#!/usr/bin/env python3
"""Generate the synthetic stand-in for the 210x7 wheat-kernel dataset.

The real file (UCI id 236) could not be fetched in the environment this
repository was built in, so the classification studies ship with this
surrogate. Its geometry mimics the real data where that matters to the
merge studies:

  * kernels of one variety share a latent size factor, so area,
    perimeter, kernel length/width and groove length are nearly
    collinear within a class (loadings 0.94-0.99);
  * the class means of those five features sit on one common size line,
    so any of them is accurately recoverable from the others by a
    low-rank imputer;
  * class 3 kernels are slightly stubbier (longer, narrower than the
    size line predicts), a shape contrast a classifier can only exploit
    with enough training rows;
  * compactness is the exact ratio 4*pi*area/perimeter^2;
  * the asymmetry coefficient separates classes but is independent of
    kernel size.

Three balanced classes of 70 rows. Deterministic; regenerate with:

    python tools/make_seed_surrogate.py

writes src/comimp/fixtures/seeds_synthetic.csv
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "comimp" / "fixtures" / "seeds_synthetic.csv"

FEATURES = (
    "area",
    "perimeter",
    "compactness",
    "kernel_length",
    "kernel_width",
    "asymmetry",
    "groove_length",
)

# class positions on the common size line: mean = BASE + SLOPE * t
T = {"1": 0.0, "2": 1.0, "3": -0.55}
BASE = np.array([14.35, 14.30, 5.51, 3.25, 5.09])   # area perim length width groove
SLOPE = np.array([3.98, 1.84, 0.64, 0.43, 0.93])
# class-3 shape contrast: longer and narrower than the size line predicts
SHAPE_3 = np.array([0.0, 0.0, 0.099, -0.18, 0.0])

ASYM_MEAN = {"1": 2.70, "2": 3.64, "3": 4.79}
ASYM_SD = {"1": 1.10, "2": 1.18, "3": 1.30}

SDS = {
    "1": (1.22, 0.58, 0.23, 0.18, 0.26),
    "2": (1.44, 0.62, 0.27, 0.19, 0.27),
    "3": (0.72, 0.34, 0.14, 0.15, 0.16),
}
LOADINGS = np.array([0.985, 0.99, 0.96, 0.94, 0.95])

PER_CLASS = 70
SEED = 20230236


def main() -> None:
    rng = np.random.default_rng(SEED)
    resid = np.sqrt(1.0 - LOADINGS**2)
    lines = [",".join(FEATURES + ("class",))]
    for cls in ("1", "2", "3"):
        mu = BASE + SLOPE * T[cls]
        if cls == "3":
            mu = mu + SHAPE_3
        sd = np.asarray(SDS[cls])
        g = rng.standard_normal((PER_CLASS, 1))
        eps = rng.standard_normal((PER_CLASS, len(LOADINGS)))
        x = mu + (g * LOADINGS + eps * resid) * sd
        asym = ASYM_MEAN[cls] + rng.standard_normal(PER_CLASS) * ASYM_SD[cls]
        compact = 4.0 * np.pi * x[:, 0] / x[:, 1] ** 2
        for i in range(PER_CLASS):
            row = [
                f"{x[i, 0]:.2f}",
                f"{x[i, 1]:.3f}",
                f"{compact[i]:.4f}",
                f"{x[i, 2]:.3f}",
                f"{x[i, 3]:.3f}",
                f"{asym[i]:.3f}",
                f"{x[i, 4]:.3f}",
            ]
            lines.append(",".join(row + [cls]))

    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({PER_CLASS * 3} rows)")


if __name__ == "__main__":
    main()
