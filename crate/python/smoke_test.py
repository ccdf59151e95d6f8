"""Quick end-to-end check of the Python bindings.

Build first:  pip install --no-build-isolation -e crates/py
"""

import math
import pathlib
import tempfile

import raceway

ASSETS = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "assets"


def main():
    params = raceway.Parameters()
    assert math.isclose(params.area, 80.0)
    assert raceway.Parameters.from_toml(params.to_toml()) == params

    s = raceway.speciate(2.0, 8.0, 25.0)
    assert math.isclose(s["co2"] + s["hco3"] + s["co3"], 2.0, rel_tol=1e-12)

    weather = raceway.Scenario.load(ASSETS / "scenario_6d.csv")
    assert weather.duration == 6 * 86400

    base = raceway.simulate(weather, days=1)
    pi = raceway.simulate(weather, ph="pi", do="pi", hd="turbidostat", temp="pi", days=1)
    assert len(base) == len(pi) == 1440
    k = pi.kpis()
    assert k["biomass_produced_g"] == (k["xf_g"] - k["x0_g"]) + k["harvested_g"]
    print(raceway.compare([base, pi], ["baseline", "pi"]))

    # a Python controller in the pH slot: full CO2 whenever pH is above reference
    calls = []

    def bang_bang(ctx, signals):
        calls.append(ctx["index"])
        signals["q_co2"] = 2.3e-4 if ctx["ph"] > ctx["ph_ref"] else 0.0

    custom = raceway.simulate(weather, ph=bang_bang, days=0.25)
    assert calls == list(range(len(custom)))
    assert custom.controllers[0] == "bang_bang"
    assert max(custom.series("q_co2_cmd")) > 0.0

    def broken(ctx, signals):
        if ctx["index"] == 3:
            raise KeyError("boom")

    try:
        raceway.simulate(weather, hd=broken, days=0.1)
    except KeyError:
        pass
    else:
        raise AssertionError("controller exception was swallowed")

    try:
        raceway.simulate(weather, ph="nope")
    except raceway.RacewayError as e:
        assert e.exit_code == 2
    else:
        raise AssertionError("bad mode accepted")

    with tempfile.TemporaryDirectory() as d:
        pi.export(d, label="pi")
        back = raceway.Results.load(d)
        assert back.as_dict() == pi.as_dict()
        assert back.summary("pi") == pi.summary("pi")

    print("smoke test passed")


if __name__ == "__main__":
    main()
