import numpy as np
import pytest

import onnx_builder as ob
from canopylai import ComputationError, DataError
from canopylai.onnx_runtime import execute_graph, load_graph


def test_load_graph_structure(tiny_model_file):
    model_path, params = tiny_model_file
    graph = load_graph(model_path)
    assert [n.op_type for n in graph.nodes] == [
        "Conv", "BatchNormalization", "Relu", "MaxPool", "Conv", "Add",
        "GlobalAveragePool", "Flatten", "Gemm"]
    assert graph.input_name == "data"
    assert graph.output_name == "embedding"
    assert graph.input_shape == (None, 3, 16, 16)  # dynamic batch dim
    assert graph.opset == 13
    for name, want in params.items():
        got = graph.initializers[name]
        assert got.dtype == np.float32
        assert np.array_equal(got, want), name


def test_load_graph_attributes(tiny_model_file):
    model_path, _ = tiny_model_file
    graph = load_graph(model_path)
    conv1 = graph.nodes[0]
    assert conv1.attrs["kernel_shape"] == [3, 3]
    assert conv1.attrs["strides"] == [2, 2]
    assert conv1.attrs["pads"] == [1, 1, 1, 1]
    pool = graph.nodes[3]
    assert pool.attrs["strides"] == [2, 2]  # encoded unpacked, decoded the same
    gemm = graph.nodes[8]
    assert gemm.attrs["transB"] == 1
    assert gemm.attrs["alpha"] == pytest.approx(1.0)
    bn = graph.nodes[1]
    assert bn.attrs["epsilon"] == pytest.approx(1e-5, rel=1e-6)


def test_execute_matches_reference(tiny_model_file):
    model_path, params = tiny_model_file
    graph = load_graph(model_path)
    rng = np.random.default_rng(40)
    batch = rng.normal(0, 1, (3, 3, 16, 16)).astype(np.float32)
    got = execute_graph(graph, batch)
    want = ob.reference_forward(params, batch)
    assert got.shape == (3, 8)
    assert got.dtype == np.float32
    np.testing.assert_allclose(got, want, rtol=1e-4, atol=1e-5)


def test_execute_rejects_declared_shape_mismatch(tiny_model_file):
    model_path, _ = tiny_model_file
    graph = load_graph(model_path)
    batch = np.zeros((2, 3, 8, 8), dtype=np.float32)  # spatial dims disagree
    with pytest.raises(ComputationError):
        execute_graph(graph, batch)


def test_load_rejects_old_opset(tmp_path):
    blob, _ = ob.tiny_convnet(opset=9)
    path = tmp_path / "old.onnx"
    path.write_bytes(blob)
    with pytest.raises(DataError, match="operator set"):
        load_graph(path)


def test_load_rejects_custom_node_domain(tmp_path):
    nodes = [ob.node("Relu", ["data"], ["out"], domain="com.example")]
    inputs = [ob.value_info("data", ["N", 4])]
    outputs = [ob.value_info("out", ["N", 4])]
    path = tmp_path / "dom.onnx"
    path.write_bytes(ob.model(nodes, [], inputs, outputs))
    with pytest.raises(DataError):
        load_graph(path)


def test_load_rejects_garbage_and_truncation(tmp_path, tiny_model_file):
    model_path, _ = tiny_model_file
    garbage = tmp_path / "g.onnx"
    garbage.write_bytes(b"\xff\xfe\xfd not a graph")
    with pytest.raises(DataError):
        load_graph(garbage)
    blob = model_path.read_bytes()
    cut = tmp_path / "cut.onnx"
    cut.write_bytes(blob[:len(blob) // 2])
    with pytest.raises(DataError):
        load_graph(cut)
    missing = tmp_path / "missing.onnx"
    with pytest.raises(DataError):
        load_graph(missing)


def test_execute_rejects_unknown_operator(tmp_path):
    nodes = [ob.node("Sigmoid", ["data"], ["out"])]
    inputs = [ob.value_info("data", ["N", 4])]
    outputs = [ob.value_info("out", ["N", 4])]
    path = tmp_path / "sig.onnx"
    path.write_bytes(ob.model(nodes, [], inputs, outputs))
    graph = load_graph(path)
    with pytest.raises(ComputationError, match="Sigmoid"):
        execute_graph(graph, np.zeros((1, 4), dtype=np.float32))


def test_execute_rejects_unknown_tensor(tmp_path):
    nodes = [ob.node("Relu", ["ghost"], ["out"])]
    inputs = [ob.value_info("data", ["N", 4])]
    outputs = [ob.value_info("out", ["N", 4])]
    path = tmp_path / "ghost.onnx"
    path.write_bytes(ob.model(nodes, [], inputs, outputs))
    graph = load_graph(path)
    with pytest.raises(ComputationError, match="ghost"):
        execute_graph(graph, np.zeros((1, 4), dtype=np.float32))


def test_individual_kernels_against_oracles(tmp_path):
    rng = np.random.default_rng(41)
    x = rng.normal(0, 1, (2, 3, 6, 6)).astype(np.float32)

    # Conv, stride 1, pad 0, 2x2 kernel: naive quadruple loop
    w = rng.normal(0, 1, (5, 3, 2, 2)).astype(np.float32)
    nodes = [ob.node("Conv", ["data", "w"], ["out"], ob.attr_ints("kernel_shape", [2, 2]))]
    path = tmp_path / "conv.onnx"
    path.write_bytes(ob.model(nodes, [ob.tensor("w", w)],
                              [ob.value_info("data", ["N", 3, 6, 6])],
                              [ob.value_info("out", ["N", 5, 5, 5])]))
    got = execute_graph(load_graph(path), x)
    want = np.zeros((2, 5, 5, 5), dtype=np.float64)
    for n in range(2):
        for o in range(5):
            for i in range(5):
                for j in range(5):
                    want[n, o, i, j] = (x[n, :, i:i + 2, j:j + 2] * w[o]).sum(dtype=np.float64)
    np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-6)

    # MaxPool 3x3 stride 2 with asymmetric padding
    nodes = [ob.node("MaxPool", ["data"], ["out"],
                     ob.attr_ints("kernel_shape", [3, 3]) + ob.attr_ints("strides", [2, 2])
                     + ob.attr_ints("pads", [1, 1, 0, 0]))]
    path = tmp_path / "pool.onnx"
    path.write_bytes(ob.model(nodes, [], [ob.value_info("data", ["N", 3, 6, 6])],
                              [ob.value_info("out", ["N", 3, 3, 3])]))
    got = execute_graph(load_graph(path), x)
    padded = np.pad(x, ((0, 0), (0, 0), (1, 0), (1, 0)), constant_values=-np.inf)
    want = np.zeros((2, 3, 3, 3), dtype=np.float32)
    for i in range(3):
        for j in range(3):
            want[:, :, i, j] = padded[:, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3].max(axis=(2, 3))
    np.testing.assert_allclose(got, want)

    # Gemm with alpha/beta
    a = rng.normal(0, 1, (4, 6)).astype(np.float32)
    wg = rng.normal(0, 1, (6, 3)).astype(np.float32)
    bias = rng.normal(0, 1, 3).astype(np.float32)
    nodes = [ob.node("Gemm", ["data", "w", "b"], ["out"],
                     ob.attr_float("alpha", 0.5) + ob.attr_float("beta", 2.0))]
    path = tmp_path / "gemm.onnx"
    path.write_bytes(ob.model(nodes, [ob.tensor("w", wg), ob.tensor("b", bias)],
                              [ob.value_info("data", ["N", 6])],
                              [ob.value_info("out", ["N", 3])]))
    got = execute_graph(load_graph(path), a)
    np.testing.assert_allclose(got, 0.5 * (a @ wg) + 2.0 * bias, rtol=1e-5, atol=1e-6)
