import gzip

import numpy as np
import pytest

from peqml.digits import DigitsFormatError, bundled_digits_path, ingest_digits, read_digits_csv


def write_csv(path, rows):
    path.write_text("\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


def synthetic_rows(per_class=3, pixels=784):
    rng = np.random.default_rng(0)
    return [[c, *rng.integers(0, 256, pixels)] for c in range(10) for _ in range(per_class)]


def test_bundled_file_defaults():
    labels, raw = read_digits_csv(bundled_digits_path())
    assert raw.shape[1] == 784
    assert set(labels.tolist()) == set(range(10))
    split = ingest_digits()
    assert len(split.train_labels) == 100 and len(split.test_labels) == 100
    assert np.bincount(split.train_labels).tolist() == [10] * 10


def test_per_class_one_and_determinism():
    a = ingest_digits(per_class_train=1, per_class_test=1, seed=3)
    b = ingest_digits(per_class_train=1, per_class_test=1, seed=3)
    c = ingest_digits(per_class_train=1, per_class_test=1, seed=4)
    assert len(a.train_labels) == 10 and len(a.test_labels) == 10
    assert np.array_equal(a.train_raw, b.train_raw)
    assert not np.array_equal(a.train_raw, c.train_raw)
    # no image appears in both train and test
    train = {r.tobytes() for r in a.train_raw}
    assert not any(r.tobytes() in train for r in a.test_raw)


def test_reduce_to_features():
    train, test = ingest_digits(per_class_train=2, per_class_test=2).reduce(5)
    assert train.features.shape == (20, 5) and test.features.shape == (20, 5)


def test_plain_and_gzip_csv(tmp_path):
    rows = synthetic_rows()
    plain = write_csv(tmp_path / "d.csv", rows)
    gz = tmp_path / "d.csv.gz"
    gz.write_bytes(gzip.compress(plain.read_bytes()))
    la, ra = read_digits_csv(plain)
    lb, rb = read_digits_csv(gz)
    assert np.array_equal(la, lb) and np.array_equal(ra, rb)
    assert ingest_digits(plain, 1, 2).train_raw.shape == (10, 784)


@pytest.mark.parametrize(
    "bad, message",
    [
        ([1, 2, "x"], "non-integer"),
        ([11, 0, 0], "label 11"),
        ([1, 0, 300], "pixel value"),
        ([1, 0], "fields, expected 3"),
    ],
)
def test_malformed_rows_report_line(tmp_path, bad, message):
    path = write_csv(tmp_path / "bad.csv", [[0, 1, 2], [1, 3, 4], bad])
    with pytest.raises(DigitsFormatError, match=rf"bad.csv:3: .*{message}|bad.csv:3: {message}"):
        read_digits_csv(path)


def test_missing_file_and_class(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_digits_csv(tmp_path / "nope.csv")
    rows = [r for r in synthetic_rows(pixels=4) if r[0] != 7]
    path = write_csv(tmp_path / "d.csv", rows)
    with pytest.raises(DigitsFormatError, match="7"):
        ingest_digits(path, 1, 1)
    # restricting the classes avoids the gap
    assert len(ingest_digits(path, 1, 1, classes=[0, 1]).train_labels) == 2
