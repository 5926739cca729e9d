import numpy as np
import pytest

from fermisurf.snapshot import MAGIC, SnapshotError, pack_field, unpack_field


class TestRoundTrip:
    def test_values_grid_and_hash_survive(self):
        rng = np.random.default_rng(7)
        vals = rng.standard_normal((5, 4, 3))
        grid = {"origin": [0.0, 0.0, 0.0], "h": 0.25, "dims": [5, 4, 3]}
        blob = pack_field(vals, grid, "abc123")
        out, grid2, h2 = unpack_field(blob)
        assert np.array_equal(out, vals)
        assert grid2 == grid
        assert h2 == "abc123"

    def test_deterministic_bytes(self):
        vals = np.arange(8.0).reshape(2, 2, 2)
        grid = {"h": 0.5, "b": 1, "a": 2}
        assert pack_field(vals, grid, "x") == pack_field(vals, grid, "x")

    def test_non_c_contiguous_input(self):
        vals = np.arange(24.0).reshape(2, 3, 4).transpose(2, 0, 1)
        blob = pack_field(vals, {}, "h")
        out, _, _ = unpack_field(blob)
        assert np.array_equal(out, vals)


class TestValidation:
    def _blob(self):
        return pack_field(np.ones((2, 2)), {"h": 1.0}, "k")

    def test_bad_magic(self):
        blob = b"WRONGMAG" + self._blob()[8:]
        with pytest.raises(SnapshotError, match="magic"):
            unpack_field(blob)

    def test_bad_version(self):
        blob = bytearray(self._blob())
        blob[8] = 99
        with pytest.raises(SnapshotError, match="version"):
            unpack_field(bytes(blob))

    def test_truncated_payload(self):
        blob = self._blob()[:-8]
        with pytest.raises(SnapshotError, match="length"):
            unpack_field(blob)

    def test_corrupt_header(self):
        blob = bytearray(self._blob())
        assert blob[:8] == MAGIC
        blob[20] = 0xFF  # inside the JSON header
        with pytest.raises(SnapshotError):
            unpack_field(bytes(blob))
