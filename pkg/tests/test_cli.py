"""
Command surface, driven through main() with captured output.
"""
import json

import numpy as np
import pandas as pd
import pytest

from eicsr.cli.commands import main
from eicsr.schemas.response import (
    BenchReport,
    CandidateRecord,
    CorpusRecord,
    EicReport,
    ErrorResponse,
    SearchResponse,
)


def error_payload(err: str) -> ErrorResponse:
    return ErrorResponse.model_validate_json(err.strip().splitlines()[-1])


@pytest.fixture
def product_csv(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(1.0, 5.0, size=(80, 2))
    path = tmp_path / "product.csv"
    pd.DataFrame({"x1": X[:, 0], "x2": X[:, 1], "y": X[:, 0] * X[:, 1]}).to_csv(path, index=False)
    return path


class TestEval:
    def test_plain_value(self, capsys):
        assert main(["eval", "--formula", "x1 + x2", "--vars", "2"]) == 0
        assert float(capsys.readouterr().out) < 0.5

    def test_cancellation(self, capsys):
        assert main(["eval", "--formula", "(x1 + 1e10) - 1e10"]) == 0
        assert float(capsys.readouterr().out) > 5.0

    def test_json_with_nodes(self, capsys):
        assert main(["eval", "--formula", "x1*x2", "--vars", "2", "--json", "--per-node"]) == 0
        report = EicReport.model_validate_json(capsys.readouterr().out)
        assert set(report.per_node) == {"root"}

    def test_json_without_nodes(self, capsys):
        assert main(["eval", "--formula", "sin(x1)", "--json"]) == 0
        assert EicReport.model_validate_json(capsys.readouterr().out).per_node == {}

    def test_tree(self, capsys):
        assert main(["eval", "--formula", "exp(x1) + 2", "--per-node"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("overall EIC")
        assert "leaf" in out and "exp(x1)" in out

    def test_csv_data(self, product_csv, capsys):
        assert main(["eval", "--formula", "x1*x2", "--data", str(product_csv)]) == 0
        assert float(capsys.readouterr().out) >= 0.0

    def test_out_file(self, tmp_path):
        out = tmp_path / "eic.txt"
        assert main(["eval", "--formula", "x1", "--out", str(out)]) == 0
        assert float(out.read_text()) == 0.0

    def test_syntax_error(self, capsys):
        assert main(["eval", "--formula", "x1 +"]) == 1
        payload = error_payload(capsys.readouterr().err)
        assert payload.error == "SyntaxError"
        assert payload.details == {"offset": 4}

    def test_unknown_variable(self, capsys):
        assert main(["eval", "--formula", "x1 + x3", "--vars", "2"]) == 1
        assert error_payload(capsys.readouterr().err).error == "UnknownSymbol"

    def test_invalid_sigma(self, capsys):
        assert main(["eval", "--formula", "x1", "--sigma", "0.5"]) == 1
        assert error_payload(capsys.readouterr().err).error == "ValidationError"

    def test_missing_formula(self):
        with pytest.raises(SystemExit) as info:
            main(["eval"])
        assert info.value.code == 2


class TestSearch:
    def test_mcts(self, product_csv, tmp_path):
        out = tmp_path / "mcts.json"
        code = main(
            ["search", "--data", str(product_csv), "--budget", "30it", "--out", str(out)]
        )
        assert code == 0
        response = SearchResponse.model_validate_json(out.read_text())
        assert response.method == "mcts"
        assert response.steps == 30
        assert response.alpha == 0.01
        assert response.best is not None and response.archive

    def test_gp(self, product_csv, capsys):
        argv = ["search", "--method", "gp", "--data", str(product_csv)]
        argv += ["--population", "10", "--budget", "2gen", "--alpha", "0"]
        assert main(argv) == 0
        response = SearchResponse.model_validate_json(capsys.readouterr().out)
        assert response.steps == 2
        assert response.alpha == 0.0

    def test_bad_budget(self, product_csv):
        with pytest.raises(SystemExit):
            main(["search", "--data", str(product_csv), "--budget", "soon"])

    def test_missing_file(self, tmp_path, capsys):
        assert main(["search", "--data", str(tmp_path / "none.csv")]) == 1
        assert error_payload(capsys.readouterr().err).error in {"DatasetError", "InternalError"}


class TestCorpora:
    def test_gen_and_compare(self, tmp_path, capsys):
        plain, filtered = tmp_path / "plain.jsonl", tmp_path / "filtered.jsonl"
        assert main(["gen", "--count", "8", "--seed", "2", "--out", str(plain)]) == 0
        argv = ["gen", "--count", "8", "--seed", "2", "--filter-eic", "2.0"]
        assert main(argv + ["--out", str(filtered)]) == 0

        lines = filtered.read_text().splitlines()
        records = [CorpusRecord.model_validate_json(line) for line in lines]
        assert len(records) == 8
        assert all(r.eic <= 2.0 for r in records)

        assert main(["compare", "--corpus", str(plain), "--corpus", str(filtered)]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 8
        assert {row["corpus"] for row in rows} == {str(plain), str(filtered)}

    def test_compare_csv_with_reference(self, tmp_path, capsys):
        corpus = tmp_path / "c.jsonl"
        main(["gen", "--count", "4", "--out", str(corpus)])
        argv = ["compare", "--corpus", str(corpus), "--reference", str(corpus), "--csv"]
        assert main(argv) == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header == "corpus,feature,js,kl,js_reduction"

    def test_corrupt_corpus(self, tmp_path, capsys):
        corpus = tmp_path / "bad.jsonl"
        corpus.write_text('{"formula": "x1"}\n')
        assert main(["compare", "--corpus", str(corpus)]) == 1
        assert error_payload(capsys.readouterr().err).error == "DatasetError"


class TestBenchAndPairs:
    def test_bench(self, tmp_path):
        out, csv = tmp_path / "bench.json", tmp_path / "bench.csv"
        argv = ["bench", "--suite", "pathological", "--trials", "1", "--budget", "5it"]
        argv += ["--out", str(out), "--csv", str(csv)]
        assert main(argv) == 0
        report = BenchReport.model_validate_json(out.read_text())
        assert len(report.rows) == 10
        assert report.aggregate.truth_eic is not None and report.aggregate.truth_eic > 3.0
        assert len(pd.read_csv(csv)) == 10

    def test_pairs(self, tmp_path, capsys):
        def front(path, record):
            response = SearchResponse(
                method="mcts",
                seed=0,
                alpha=0.0,
                eta=0.999,
                budget="1 steps",
                steps=1,
                evaluations=1,
                archive=[record],
            )
            path.write_text(response.model_dump_json())

        a = CandidateRecord(formula="x1", r2=0.90, nmse=0.1, complexity=10, eic=0.5, fitness=0.5)
        b = CandidateRecord(formula="x2", r2=0.91, nmse=0.09, complexity=11, eic=5.0, fitness=0.5)
        front(tmp_path / "a.json", a)
        front(tmp_path / "b.json", b)
        argv = ["pairs", "--front", str(tmp_path / "a.json"), "--front", str(tmp_path / "b.json")]
        assert main(argv) == 0
        pairs = json.loads(capsys.readouterr().out)
        assert len(pairs) == 1
        assert pairs[0]["distance"] == pytest.approx(-19.2499)

    def test_pairs_needs_two_fronts(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["pairs", "--front", str(tmp_path / "a.json")])
        assert info.value.code == 2


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["search", "--budget", "25it", "--seed", "4"],
            ["search", "--method", "gp", "--population", "12", "--budget", "2gen", "--seed", "4"],
        ],
        ids=["mcts", "gp"],
    )
    def test_search_output_is_byte_identical(self, product_csv, tmp_path, argv):
        outputs = []
        for run in range(2):
            out = tmp_path / f"search{run}.json"
            assert main(argv + ["--data", str(product_csv), "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    @pytest.mark.parametrize("extra", [[], ["--filter-eic", "2.0"]], ids=["plain", "filtered"])
    def test_gen_output_is_byte_identical(self, tmp_path, extra):
        outputs = []
        for run in range(2):
            out = tmp_path / f"gen{run}.jsonl"
            assert main(["gen", "--count", "12", "--seed", "6", *extra, "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_bench_output_is_byte_identical_by_default(self, tmp_path):
        outputs = []
        for run in range(2):
            out = tmp_path / f"bench{run}.json"
            argv = ["bench", "--suite", "physics", "--trials", "1", "--budget", "5it"]
            assert main(argv + ["--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
