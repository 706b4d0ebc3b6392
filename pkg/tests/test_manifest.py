import pytest

from tokenprune import FormatError, PrunerConfig, SelectionConfig, BudgetPolicy, TokenGrid
from tokenprune.manifest import load_manifest, save_manifest


def write_episode_stub(root, steps=2):
    (root / "frames").mkdir()
    (root / "feats").mkdir()
    frames, features = [], []
    for t in range(steps):
        frame = f"frames/frame_{t:05d}.ppm"
        feat = f"feats/feat_{t:05d}.iapt"
        (root / frame).write_bytes(b"stub")
        (root / feat).write_bytes(b"stub")
        frames.append(frame)
        features.append(feat)
    (root / "text.iapt").write_bytes(b"stub")
    (root / "truth.csv").write_text("step,targets,movers\n0,,\n1,,\n")
    return frames, features


class TestRoundtrip:
    def test_save_then_load_preserves_config(self, tmp_path):
        frames, features = write_episode_stub(tmp_path)
        config = PrunerConfig(
            temperature=0.02,
            selection=SelectionConfig(budget=3, budget_policy=BudgetPolicy.EXACT),
        )
        save_manifest(
            tmp_path / "manifest.txt", config, TokenGrid(2, 2, 4), 2,
            frames, features, "text.iapt", "truth.csv",
        )
        loaded = load_manifest(tmp_path / "manifest.txt")
        assert loaded.config == config
        assert loaded.grid == TokenGrid(2, 2, 4)
        assert loaded.steps == 2
        assert len(loaded.frames) == 2
        assert loaded.truth is not None

    def test_truth_is_optional(self, tmp_path):
        frames, features = write_episode_stub(tmp_path)
        save_manifest(
            tmp_path / "manifest.txt", PrunerConfig(), TokenGrid(2, 2, 4), 2,
            frames, features, "text.iapt",
        )
        assert load_manifest(tmp_path / "manifest.txt").truth is None


class TestValidation:
    def make_manifest(self, tmp_path, mutate=None):
        frames, features = write_episode_stub(tmp_path)
        save_manifest(
            tmp_path / "manifest.txt", PrunerConfig(), TokenGrid(2, 2, 4), 2,
            frames, features, "text.iapt", "truth.csv",
        )
        if mutate:
            text = (tmp_path / "manifest.txt").read_text()
            (tmp_path / "manifest.txt").write_text(mutate(text))
        return tmp_path / "manifest.txt"

    def test_unknown_key_rejected(self, tmp_path):
        path = self.make_manifest(
            tmp_path, lambda text: text.replace("[episode]", "[episode]\nmystery=1")
        )
        with pytest.raises(FormatError, match="mystery"):
            load_manifest(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = self.make_manifest(tmp_path, lambda text: text + "\n[extra]\nx=1\n")
        with pytest.raises(FormatError, match="extra"):
            load_manifest(path)

    def test_missing_required_key_rejected(self, tmp_path):
        path = self.make_manifest(
            tmp_path, lambda text: text.replace("temperature=0.01\n", "")
        )
        with pytest.raises(FormatError, match="temperature"):
            load_manifest(path)

    def test_missing_referenced_file_rejected(self, tmp_path):
        path = self.make_manifest(tmp_path)
        (tmp_path / "frames" / "frame_00001.ppm").unlink()
        with pytest.raises(FormatError, match="does not exist"):
            load_manifest(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = self.make_manifest(
            tmp_path, lambda text: text.replace("steps=2", "steps=2\nsteps=2")
        )
        with pytest.raises(FormatError, match="duplicate"):
            load_manifest(path)

    def test_absent_manifest(self, tmp_path):
        with pytest.raises(FormatError, match="not found"):
            load_manifest(tmp_path / "nope.txt")
