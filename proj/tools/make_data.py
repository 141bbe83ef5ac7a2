"""Writes the bundled CSV snapshots under data/.

iris comes from scikit-learn. crabs and real_estate are seeded synthetic
stand-ins with the same column layout as the public datasets.
"""
import csv
import pathlib

import numpy as np
from sklearn.datasets import load_iris

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def write(name, header, rows):
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.6g}" if isinstance(v, float) else v for v in r])


def iris():
    d = load_iris()
    header = ["sepal_length", "sepal_width", "petal_length", "petal_width", "species"]
    rows = [[float(v) for v in x] + [int(y)] for x, y in zip(d.data, d.target)]
    write("iris.csv", header, rows)


def crabs(rng):
    # 50 crabs per (species, sex); five morphometric measurements in mm.
    rows = []
    for species in (0, 1):
        for sex in (0, 1):
            for _ in range(50):
                size = rng.normal(0.0, 1.0)
                fl = 15.5 + 3.0 * size + 2.8 * species + rng.normal(0, 0.45)
                rw = 12.5 + 2.0 * size + 2.2 * sex + rng.normal(0, 0.45)
                cl = 32.0 + 6.5 * size + 2.0 * species - 0.6 * sex + rng.normal(0, 0.7)
                cw = 36.5 + 7.0 * size + 1.4 * species + rng.normal(0, 0.7)
                bd = 14.0 + 3.0 * size + 2.0 * species - 0.5 * sex + rng.normal(0, 0.45)
                rows.append([fl, rw, cl, cw, bd, 1 - species, species, 1 - sex, sex])
    header = ["FL", "RW", "CL", "CW", "BD", "blue", "orange", "male", "female"]
    write("crabs.csv", header, rows)


def real_estate(rng):
    n = 414
    date = rng.uniform(2012.67, 2013.58, n)
    age = rng.uniform(0, 43.8, n)
    dist = np.exp(rng.uniform(np.log(23), np.log(6500), n))
    stores = np.clip(np.round(10 - 1.1 * np.log(dist) + rng.normal(0, 1.5, n)), 0, 10)
    lat = 24.968 + rng.normal(0, 0.012, n) - 1.5e-6 * dist
    lon = 121.54 + rng.normal(0, 0.015, n) - 3e-6 * dist
    price = (
        44.0
        - 6.0 * np.log(dist / 500.0)
        - 0.25 * age
        + 0.004 * (age - 20) ** 2
        + 1.0 * stores
        + 5.0 * (date - 2013.0)
        + rng.normal(0, 4.0, n)
    )
    price = np.clip(price, 7.0, 118.0)
    header = ["X1_date", "X2_age", "X3_mrt_distance", "X4_stores", "X5_latitude", "X6_longitude", "Y_price"]
    rows = [[float(v) for v in r] for r in zip(date, age, dist, stores, lat, lon, price)]
    write("real_estate.csv", header, rows)


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20211)
    iris()
    crabs(rng)
    real_estate(rng)
