"""Quick check that the Python bindings load and the main operations run."""

import math
import os
import tempfile

import radcount


def main():
    cubes = radcount.generate_room("a", 2, seed=0)
    assert len(cubes) == 8
    cube = cubes[5]
    assert cube.shape == (60, 12, 91)
    data = cube.data()
    assert 0.0 <= min(data) and max(data) <= 1.0

    sigma = radcount.std_map(cube)
    assert len(sigma) == 12 * 91

    weighted = radcount.sigmoid_weighting(cube)
    zeroed = radcount.threshold_zero(cube, 0.02)
    filtered = radcount.preprocess(cube, "butterworth_bandpass")
    for c in (weighted, zeroed, filtered):
        assert c.shape == cube.shape

    assert radcount.flip(radcount.flip(cube, "both"), "both").data() == data
    scaled = radcount.random_scale(cube, seed=1)
    ratio = scaled.get(0, 0, 45) / cube.get(0, 0, 45)
    assert 0.95 <= ratio <= 1.05
    radcount.drop_and_interpolate(cube, seed=2)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "cube.rdc")
        cube.write(path)
        back = radcount.RadarCube.read(path)
        assert back.data() == data and back.label == cube.label

    assert radcount.ami([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert math.isclose(
        radcount.ami([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 2, 2]), 0.22504228319830885, abs_tol=1e-9
    )
    assert radcount.fisher_score([[0.0], [0.1], [1.0], [1.1]], [0, 0, 1, 1]) > 10
    assert f"{radcount.improvement_pct(1.2474, 0.6219):.1f}" == "50.1"

    csv = radcount.study_transfer(
        '{"n_per_class_a": 12, "n_per_class_c": 12, "seeds": [0],'
        ' "transfer_sizes": [2, 4, 6, 8], "train": {"max_epochs": 3, "patience": 1}}'
    )
    assert len(csv.strip().splitlines()) == 6
    print("smoke test passed")


if __name__ == "__main__":
    main()
