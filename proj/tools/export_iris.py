"""Write the iris data as data/iris.csv (four features, label 1..3 last)."""
import csv
import pathlib
import sys

from sklearn.datasets import load_iris


def main(out: str) -> None:
    data = load_iris()
    path = pathlib.Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, "label"])
        for row, label in zip(data.data, data.target):
            w.writerow([*(repr(float(v)) for v in row), int(label) + 1])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/iris.csv")
