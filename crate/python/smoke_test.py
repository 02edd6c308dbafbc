"""Smoke test for the neurosim Python module.

Build and install first:  maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/neurosim-*.whl
"""

import json
import os
import tempfile

import neurosim


def main():
    net = neurosim.Network("bcu-mini", seed=3)
    c, h, w = net.input_shape
    x = [((i * 37) % 101) / 50.0 - 1.0 for i in range(c * h * w)]
    logits, spikes = net.forward(x)
    assert len(logits) == net.num_classes == 2
    assert len(spikes) == 1
    assert net.predict(x) == max(range(2), key=lambda k: logits[k])
    assert net.forward(x) == (logits, spikes)

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.nsnn")
        net.save(path)
        assert neurosim.Network.load(path).forward(x) == (logits, spikes)

    run = json.loads(net.analog_run(x, adc_bits=12))
    assert len(run["frames"]) == c * h * w + 2
    for word in run["frames"]:
        neurosim.spi_decode(word)

    assert neurosim.crc8(b"123456789") == 0xF4
    word = neurosim.spi_encode(5, 2, 0xABC0)
    assert neurosim.spi_decode(word) == (5, 2, 0xABC0)
    try:
        neurosim.spi_decode(word ^ 1)
    except ValueError:
        pass
    else:
        raise AssertionError("corrupted frame decoded")

    assert neurosim.adc_quantize(-1.0, bits=8) == 0
    assert neurosim.adc_quantize(1.0, bits=8) == 255
    assert neurosim.dac_reconstruct(255, bits=8) == 1.0

    assert sum(neurosim.count_macs("bcu-ref")) * 32 == 1_349_517_312
    assert net.macs() == sum(neurosim.count_macs("bcu-mini")) * net.timesteps

    bcu = json.loads(neurosim.perf_report("bcu"))
    used = {r["resource"]: r["used"] for r in bcu["resources"]}
    assert used["dsp"] == 518 and used["io"] == 139
    assert abs(bcu["latency_s"] - 0.012) < 1e-12
    table = json.loads(neurosim.compare())
    assert table["rows"][1]["speedup"] == 16.0
    print("python smoke test passed")


if __name__ == "__main__":
    main()
