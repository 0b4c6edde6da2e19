"""Exporter contract: format interop, pooling determinism, error handling."""

import json
import struct

import numpy as np
import pytest

from cevexport import ExportError, export, verify_export
from cevexport.cli import main
from cevexport.export import read_sidecar

from tiny_encoder import HIDDEN, WINDOWS

# Interop is checked against the consuming side's own loader.
from spurmatch.contexts import cosine, load_embeddings


@pytest.fixture()
def exported(manifest_path, encoder_dir, tmp_path):
    out = tmp_path / "ctx.cev"
    manifest = export(manifest_path, str(encoder_dir), out, batch_size=4)
    return manifest, out


class TestFormat:
    def test_header_dim_is_four_times_hidden(self, exported):
        manifest, out = exported
        assert manifest.hidden_size == HIDDEN
        assert manifest.dim == 4 * HIDDEN
        store = load_embeddings(out)
        assert store.dim == 4 * HIDDEN

    def test_round_trip_every_context_id_once(self, exported, manifest_path):
        _, out = exported
        store = load_embeddings(out)
        assert set(store.vectors) == {w[0] for w in WINDOWS}
        assert len(store) == len(WINDOWS)
        assert verify_export(manifest_path, out) == len(WINDOWS)

    def test_export_manifest_sidecar(self, exported, manifest_path):
        manifest, out = exported
        doc = json.loads((out.parent / (out.name + ".manifest.json")).read_text())
        assert doc["count"] == len(WINDOWS)
        assert doc["dim"] == 4 * HIDDEN
        import hashlib

        assert doc["sidecar_sha256"] == hashlib.sha256(manifest_path.read_bytes()).hexdigest()

    def test_count_mismatch_detected(self, exported, manifest_path, tmp_path):
        _, out = exported
        data = bytearray(out.read_bytes())
        dim, count = struct.unpack_from("<IQ", data, 4)
        stride = 8 + 4 * dim
        truncated = tmp_path / "short.cev"
        data[8:16] = (count - 1).to_bytes(8, "little")
        truncated.write_bytes(bytes(data[: 16 + (count - 1) * stride]))
        with pytest.raises(ExportError, match="count mismatch"):
            verify_export(manifest_path, truncated)


class TestPooling:
    def test_identical_window_text_gives_identical_vectors(self, exported):
        _, out = exported
        store = load_embeddings(out)
        assert store.vectors[0].tobytes() == store.vectors[1].tobytes()

    def test_near_duplicate_pair_scores_above_corpus_mean(self, exported):
        _, out = exported
        store = load_embeddings(out)
        ids = sorted(store.vectors)
        sims = [
            cosine(store.vectors[a], store.vectors[b])
            for i, a in enumerate(ids)
            for b in ids[i + 1 :]
        ]
        pair = cosine(store.vectors[0], store.vectors[1])
        assert pair > float(np.mean(sims))

    def test_empty_window_still_embedded(self, exported):
        _, out = exported
        store = load_embeddings(out)
        assert np.any(store.vectors[10] != 0.0)

    def test_deterministic_across_runs(self, manifest_path, encoder_dir, tmp_path):
        out1, out2 = tmp_path / "a.cev", tmp_path / "b.cev"
        export(manifest_path, str(encoder_dir), out1, batch_size=3)
        export(manifest_path, str(encoder_dir), out2, batch_size=3)
        assert out1.read_bytes() == out2.read_bytes()

    def test_batch_size_changes_are_bounded_and_order_preserving(
        self, manifest_path, encoder_dir, tmp_path
    ):
        out1, out2 = tmp_path / "a.cev", tmp_path / "b.cev"
        export(manifest_path, str(encoder_dir), out1, batch_size=2)
        export(manifest_path, str(encoder_dir), out2, batch_size=8)
        s1, s2 = load_embeddings(out1), load_embeddings(out2)
        assert sorted(s1.vectors) == sorted(s2.vectors)
        for cid in s1.vectors:
            np.testing.assert_allclose(
                s1.vectors[cid], s2.vectors[cid], atol=1e-4, rtol=1e-4
            )


class TestErrors:
    def test_missing_encoder(self, manifest_path, tmp_path):
        with pytest.raises(ExportError, match="cannot load encoder"):
            export(manifest_path, str(tmp_path / "nope"), tmp_path / "x.cev")

    def test_too_few_layers(self, manifest_path, shallow_encoder_dir, tmp_path):
        with pytest.raises(ExportError, match="hidden layers"):
            export(manifest_path, str(shallow_encoder_dir), tmp_path / "x.cev")

    def test_bad_manifest(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"artifact": "something-else"}\n')
        with pytest.raises(ExportError, match="not a contexts manifest"):
            read_sidecar(bad)

    def test_duplicate_context_id_in_manifest(self, tmp_path):
        bad = tmp_path / "dup.jsonl"
        rec = json.dumps(
            {"context_id": 1, "sentence_id": 0, "word": "w", "position": 0, "left": [], "right": ["a"]}
        )
        bad.write_text('{"artifact": "contexts"}\n' + rec + "\n" + rec + "\n")
        with pytest.raises(ExportError, match="duplicate context_id"):
            read_sidecar(bad)


class TestCli:
    def test_happy_path(self, manifest_path, encoder_dir, tmp_path, capsys):
        out = tmp_path / "cli.cev"
        code = main(
            [
                "--contexts", str(manifest_path),
                "--model", str(encoder_dir),
                "--out", str(out),
                "--batch-size", "4",
                "--verify",
            ]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert f"dim {4 * HIDDEN}" in stdout
        assert "verified" in stdout
        assert out.exists()

    def test_error_exit_code(self, manifest_path, tmp_path, capsys):
        code = main(
            [
                "--contexts", str(manifest_path),
                "--model", str(tmp_path / "missing"),
                "--out", str(tmp_path / "x.cev"),
            ]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err
