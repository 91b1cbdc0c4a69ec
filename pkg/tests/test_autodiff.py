"""Engine tests: every primitive's adjoint against central differences,
plus graph bookkeeping contracts."""

import numpy as np
import pytest

from signet import autodiff as ad
from signet.autodiff import (
    ContractViolationError,
    GradCheckReport,
    Graph,
    ShapeMismatchError,
    Tensor,
    grad_check,
)

FD_STEP = 1e-5
FD_TOL = 1e-4


def numeric_gradient(fn, param: Tensor, step=FD_STEP) -> np.ndarray:
    flat = param.value.reshape(-1)
    out = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = fn().value[0, 0]
        flat[i] = orig - step
        f_minus = fn().value[0, 0]
        flat[i] = orig
        out[i] = (f_plus - f_minus) / (2.0 * step)
    return out.reshape(param.value.shape)


def assert_matches_fd(fn, params: dict[str, Tensor]):
    for t in params.values():
        t.grad = None
    ad.backward(fn())
    for name, t in params.items():
        analytic = np.zeros_like(t.value) if t.grad is None else t.grad
        numeric = numeric_gradient(fn, t)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        rel = np.abs(analytic - numeric) / denom
        assert rel.max() < FD_TOL, f"{name}: max rel error {rel.max():.2e}"


def scalarize(t: Tensor) -> Tensor:
    # sum of squares keeps every entry's gradient nonzero and well scaled
    return ad.sum_all(ad.mul(t, t))


def make_param(rng, rows, cols, name="p") -> Tensor:
    return Tensor(rng.standard_normal((rows, cols)), requires_grad=True, name=name)


class TestPrimitiveGradients:
    """Every operation type, randomized shapes, 20 seeds."""

    @pytest.mark.parametrize("seed", range(20))
    def test_all_ops(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        k = int(rng.integers(1, 4))
        a = make_param(rng, m, n, "a")
        b = make_param(rng, m, n, "b")
        c = make_param(rng, n, k, "c")
        s = make_param(rng, 1, 1, "s")
        pos = Tensor(rng.uniform(0.5, 2.0, (m, n)), requires_grad=True, name="pos")
        row = make_param(rng, 1, n, "row")
        logits = make_param(rng, 1, 3, "logits")
        # keep phases away from the +-pi wrap discontinuity
        phases = rng.uniform(-2.8, 2.8, (m, n))
        phases[np.abs(np.abs(phases) - np.pi) < 0.05] = 0.3
        ph = Tensor(phases, requires_grad=True, name="ph")

        cases = {
            "add": (lambda: scalarize(ad.add(a, b)), {"a": a, "b": b}),
            "sub": (lambda: scalarize(ad.sub(a, b)), {"a": a, "b": b}),
            "neg": (lambda: scalarize(ad.neg(a)), {"a": a}),
            "shift": (lambda: scalarize(ad.shift(a, 1.5)), {"a": a}),
            "scale": (lambda: scalarize(ad.scale(a, -0.7)), {"a": a}),
            "mul": (lambda: scalarize(ad.mul(a, b)), {"a": a, "b": b}),
            "div": (lambda: scalarize(ad.div(a, pos)), {"a": a, "pos": pos}),
            "smul": (lambda: scalarize(ad.smul(s, a)), {"s": s, "a": a}),
            "matmul": (lambda: scalarize(ad.matmul(a, c)), {"a": a, "c": c}),
            "transpose": (lambda: scalarize(ad.transpose(a)), {"a": a}),
            "reshape": (lambda: scalarize(ad.reshape(a, n, m)), {"a": a}),
            "concat_rows": (lambda: scalarize(ad.concat_rows([a, b, a])), {"a": a, "b": b}),
            "slice_cols": (lambda: scalarize(ad.slice_cols(a, 0, max(1, n - 1))), {"a": a}),
            "take_row": (lambda: scalarize(ad.take_row(a, m - 1)), {"a": a}),
            "sum_all": (lambda: ad.mul(ad.sum_all(a), ad.sum_all(a)), {"a": a}),
            "row_sums": (lambda: scalarize(ad.row_sums(a)), {"a": a}),
            "tanh": (lambda: scalarize(ad.tanh(a)), {"a": a}),
            "sigmoid": (lambda: scalarize(ad.sigmoid(a)), {"a": a}),
            "cos": (lambda: scalarize(ad.cos(a)), {"a": a}),
            "sin": (lambda: scalarize(ad.sin(a)), {"a": a}),
            "pow_const": (lambda: scalarize(ad.pow_const(pos, -0.5)), {"pos": pos}),
            "wrap_phase": (lambda: scalarize(ad.cos(ad.wrap_phase(ph))), {"ph": ph}),
            "softmax_rows": (lambda: scalarize(ad.softmax_rows(a)), {"a": a}),
            "softmax_pos": (lambda: scalarize(ad.softmax_signed(row, "pos")), {"row": row}),
            "softmax_neg": (lambda: scalarize(ad.softmax_signed(row, "neg")), {"row": row}),
            "cross_entropy": (
                lambda: ad.cross_entropy_with_logits(logits, 1),
                {"logits": logits},
            ),
        }
        for op_name, (fn, params) in cases.items():
            try:
                assert_matches_fd(fn, params)
            except AssertionError as exc:
                raise AssertionError(f"op {op_name}: {exc}") from exc


class TestGraphContracts:
    def test_quadratic_of_real_part(self):
        # f(x) = (Re x)^2 at x = 1 + 0i: d/d(re) = 2, d/d(im) = 0
        g = Graph()
        re = g.parameter("x.re", [[1.0]])
        im = g.parameter("x.im", [[0.0]])
        loss = ad.mul(re, re)
        grads = g.backward(loss)
        assert grads["x.re"][0, 0] == pytest.approx(2.0)
        assert grads["x.im"][0, 0] == 0.0

    def test_constant_leaf_gets_no_entry(self):
        g = Graph()
        p = g.parameter("p", [[2.0]])
        c = g.parameter("c", [[3.0]], trainable=False)
        grads = g.backward(ad.mul(p, c))
        assert "c" not in grads
        assert grads["p"][0, 0] == pytest.approx(3.0)

    def test_fanout_accumulates_additively(self):
        g = Graph()
        p = g.parameter("p", [[1.5]])
        loss = ad.add(ad.mul(p, p), ad.mul(p, p))
        grads = g.backward(loss)
        assert grads["p"][0, 0] == pytest.approx(4.0 * 1.5)

    def test_non_scalar_loss_rejected(self):
        g = Graph()
        p = g.parameter("p", [[1.0, 2.0]])
        with pytest.raises(ContractViolationError):
            ad.backward(ad.mul(p, p))

    def test_random_three_op_graph_matches_fd(self):
        rng = np.random.default_rng(7)
        a = make_param(rng, 2, 3, "a")
        b = make_param(rng, 3, 2, "b")

        def fn():
            return ad.sum_all(ad.tanh(ad.matmul(a, b)))

        assert_matches_fd(fn, {"a": a, "b": b})

    def test_topological_order(self):
        a = Tensor([[1.0]], requires_grad=True)
        b = ad.mul(a, a)
        c = ad.add(b, a)
        order = ad.topo_order(c)
        positions = {id(t): i for i, t in enumerate(order)}
        assert positions[id(a)] < positions[id(b)] < positions[id(c)]

    def test_shape_errors_name_both_shapes(self):
        a = Tensor(np.zeros((2, 3)))
        b = Tensor(np.zeros((3, 3)))
        with pytest.raises(ShapeMismatchError, match=r"\(2, 3\).*\(3, 3\)"):
            ad.add(a, b)
        with pytest.raises(ShapeMismatchError, match=r"\(3, 3\).*\(2, 3\)"):
            ad.matmul(b, a)

    def test_duplicate_parameter_name_rejected(self):
        g = Graph()
        g.parameter("p", [[1.0]])
        with pytest.raises(ValueError):
            g.parameter("p", [[2.0]])


class TestGradCheckHarness:
    def test_quadratic_is_exact_to_float_noise(self):
        rng = np.random.default_rng(3)
        p = make_param(rng, 2, 2, "p")
        report = grad_check(lambda: ad.sum_all(ad.mul(p, p)), {"p": p})
        assert report.worst < 1e-8

    def test_full_model_fixture_passes(self):
        from signet.gradcheck import run_full_gradient_check

        report = run_full_gradient_check(seed=0)
        assert report.passed(), str(report.raw)

    def test_detects_broken_adjoint(self):
        # an op whose forward is tanh but whose backward pretends it is identity
        def broken_tanh(a: Tensor) -> Tensor:
            def vjp(g):
                a.accumulate(g)

            return Tensor(
                np.tanh(a.value), requires_grad=a.requires_grad, parents=(a,), vjp=vjp
            )

        rng = np.random.default_rng(5)
        p = make_param(rng, 1, 4, "p")
        report = grad_check(lambda: ad.sum_all(ad.mul(broken_tanh(p), broken_tanh(p))), {"p": p})
        assert report.worst > 1e-2

    def test_report_formats(self):
        report = GradCheckReport(worst=1e-5, per_parameter={"p": 1e-5}, worst_parameter="p")
        assert "p" in str(report)
