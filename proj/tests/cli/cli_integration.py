#!/usr/bin/env python3
"""End-to-end checks of the bioqa executable: manifests, exit codes, config."""

import argparse
import json
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

BIOQA = ""
DATA = Path()


def fnv1a64(data: bytes) -> str:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def run(*args, ok=True):
    proc = subprocess.run([BIOQA, *map(str, args)], capture_output=True, text=True)
    if ok and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def manifest(path: Path):
    return json.loads(Path(str(path) + ".manifest.json").read_text())


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_manifest_chain_links_outputs_to_inputs(self):
        conv, red, stats = self.tmp / "conv.json", self.tmp / "red.json", self.tmp / "stats.json"
        run("convert", "--in", DATA / "audit" / "batch1.json", "--strategy", "abstract", "--out", conv)
        run("reduce", "--in", conv, "--out", red)
        run("stats", "--in", red, "--vs", DATA / "squad_small.json", "--out", stats)

        m_conv, m_red, m_stats = manifest(conv), manifest(red), manifest(stats)
        self.assertEqual(m_conv["outputs"][0]["fnv1a64"], m_red["inputs"][0]["fnv1a64"])
        self.assertEqual(m_red["outputs"][0]["fnv1a64"], m_stats["inputs"][0]["fnv1a64"])
        for m, path in [(m_conv, conv), (m_red, red), (m_stats, stats)]:
            self.assertEqual(m["outputs"][0]["fnv1a64"], fnv1a64(path.read_bytes()))
            self.assertEqual(m["version"], "0.1.0")
            self.assertNotIn("time", json.dumps(m))
        self.assertEqual(m_conv["config"]["strategy"], "abstract")
        self.assertIn("discrepancy", json.loads(stats.read_text()))

    def test_identical_runs_are_byte_identical(self):
        outs = []
        for name in ["a", "b"]:
            out = self.tmp / name / "conv.json"
            run("convert", "--in", DATA / "audit" / "batch2.json", "--strategy", "appended",
                "--window", "1", "--out", out, "--report", self.tmp / name / "report.json")
            outs.append((out.read_bytes(), (self.tmp / name / "report.json").read_bytes()))
        self.assertEqual(outs[0], outs[1])

    def test_boundary_flag_reaches_conversion(self):
        src = self.tmp / "q.json"
        src.write_text(json.dumps({"questions": [{
            "id": "q", "type": "factoid", "body": "?", "exact_answer": [["RNA"]],
            "snippets": [{"text": "microRNA-21 and RNA"}]}]}))
        strict, loose = self.tmp / "strict.json", self.tmp / "loose.json"
        run("convert", "--in", src, "--out", strict)
        run("--boundary", "false", "convert", "--in", src, "--out", loose)

        def spans(p):
            qa = json.loads(p.read_text())["data"][0]["paragraphs"][0]["qas"][0]
            return [a["answer_start"] for a in qa["answers"]]

        self.assertEqual(spans(strict), [16])
        self.assertEqual(spans(loose), [5, 16])

    def test_audit_reproduces_fixture_fractions(self):
        out = self.tmp / "audit.json"
        inputs = []
        for b in range(1, 6):
            inputs += ["--in", DATA / "audit" / f"batch{b}.json"]
        run("audit", *inputs, "--out", out)
        report = json.loads(out.read_text())
        expected = json.loads((DATA / "audit" / "expected.json").read_text())
        for batch, cells in expected["batches"].items():
            for qtype, cell in cells.items():
                got = report["batches"][batch][qtype]
                self.assertEqual(got["fraction"], f"{cell['unanswerable']}/{cell['total']}")

    def test_evaluate_with_mismatched_ids_fails_naming_the_id(self):
        preds = self.tmp / "preds.json"
        preds.write_text(json.dumps({"factoid": {"q1": ["TGM1"], "q2": ["x"], "zz9": ["y"]},
                                     "list": {"q3": ["BRCA1"]}, "yesno": {"q4": "yes"}}))
        proc = run("evaluate", "--golden", DATA / "golden_fixture.json", "--preds", preds,
                   "--out", self.tmp / "m.json", ok=False)
        self.assertEqual(proc.returncode, 7)
        err = json.loads(proc.stderr)["error"]
        self.assertEqual(err["kind"], "data_mismatch")
        self.assertIn("'zz9'", err["message"])
        self.assertFalse((self.tmp / "m.json").exists())

        preds.write_text(json.dumps({"factoid": {"q1": ["TGM1"]}}))
        proc = run("evaluate", "--golden", DATA / "golden_fixture.json", "--preds", preds,
                   "--out", self.tmp / "m.json", ok=False)
        self.assertEqual(proc.returncode, 7)
        self.assertIn("'q2'", json.loads(proc.stderr)["error"]["message"])

    def test_error_kinds_have_distinct_exit_codes(self):
        bad = self.tmp / "bad.json"
        bad.write_text("{oops")
        schema = self.tmp / "schema.json"
        schema.write_text('{"data": 1}')
        cases = [
            (["convert", "--nope"], 2, "usage"),
            (["convert", "--in", bad, "--out", self.tmp / "o.json"], 3, "parse"),
            (["convert", "--in", schema, "--out", self.tmp / "o.json"], 4, "schema"),
            (["convert", "--in", DATA / "audit" / "batch1.json", "--strategy", "bogus",
              "--out", self.tmp / "o.json"], 2, "usage"),
            (["convert", "--in", self.tmp / "missing.json", "--out", self.tmp / "o.json"], 6, "io"),
        ]
        for args, code, kind in cases:
            proc = run(*args, ok=False)
            self.assertEqual(proc.returncode, code, args)
            self.assertEqual(json.loads(proc.stderr)["error"]["kind"], kind)

    def test_config_file_sits_between_flags_and_defaults(self):
        cfg = self.tmp / "cfg.toml"
        cfg.write_text("normalize = false\n")
        out = self.tmp / "m.json"
        args = ["evaluate", "--golden", DATA / "golden_fixture.json",
                "--preds", DATA / "preds_fixture.json", "--out", out]
        run(*args)
        self.assertTrue(manifest(out)["config"]["normalize"])
        run("--config", cfg, *args)
        self.assertFalse(manifest(out)["config"]["normalize"])
        strict = json.loads(out.read_text())
        run("--config", cfg, "--normalize", "true", *args)
        self.assertTrue(manifest(out)["config"]["normalize"])
        # The rank-1 "tgm1" only matches gold "TGM1" after normalization.
        self.assertLess(strict["factoid"]["sacc"], json.loads(out.read_text())["factoid"]["sacc"])

    def test_dedup_keeps_first_surface_form(self):
        out = self.tmp / "dd.json"
        run("dedup", "--in", DATA / "preds_fixture.json", "--out", out)
        got = json.loads(out.read_text())
        self.assertEqual(got["factoid"]["q1"], ["tgm1", "Keratin 5"])
        self.assertEqual(got["list"]["q3"], ["BRCA1", "breast cancer 1"])

    def test_train_toy_writes_logs_and_comparison(self):
        out = self.tmp / "run"
        plans = DATA / "plans"
        run("train-toy", "--plan", plans / "nli_then_squad.json",
            "--plan", plans / "squad_then_nli.json", "--out", out)
        comparison = json.loads((out / "comparison.json").read_text())
        self.assertFalse(comparison["same_final_checksum"])
        csv = (out / "plan_a" / "stage_0_nli.csv").read_text().splitlines()
        self.assertEqual(csv[0], "epoch,loss")
        self.assertEqual(len(csv), 1 + 9)
        checksums = json.loads((out / "plan_a" / "checksums.json").read_text())
        stages = checksums["stages"]
        for prev, cur in zip(stages, stages[1:]):
            self.assertEqual(prev["end_checksum"], cur["start_checksum"])

        again = self.tmp / "again"
        run("train-toy", "--plan", plans / "nli_then_squad.json",
            "--plan", plans / "squad_then_nli.json", "--out", again)
        for rel in ["comparison.json", "plan_a/metrics.json", "plan_b/checksums.json",
                    "plan_b/stage_2_bioasq_factoid.csv", "manifest.json"]:
            self.assertEqual((out / rel).read_bytes().replace(str(out).encode(), b""),
                             (again / rel).read_bytes().replace(str(again).encode(), b""), rel)

    def test_stage_failure_names_the_stage(self):
        plan = json.loads((DATA / "plans" / "nli_then_squad.json").read_text())
        plan["stages"][1]["learning_rate"] = -1.0
        path = self.tmp / "plan.json"
        path.write_text(json.dumps(plan))
        proc = run("train-toy", "--plan", path, "--out", self.tmp / "r", ok=False)
        self.assertEqual(proc.returncode, 5)
        self.assertIn("stage 'squad'", json.loads(proc.stderr)["error"]["message"])


def main():
    global BIOQA, DATA
    parser = argparse.ArgumentParser()
    parser.add_argument("--bioqa", required=True)
    parser.add_argument("--data", required=True, type=Path)
    args, rest = parser.parse_known_args()
    BIOQA, DATA = args.bioqa, args.data
    unittest.main(argv=[sys.argv[0], *rest], verbosity=2)


if __name__ == "__main__":
    main()
