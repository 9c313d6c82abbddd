from cohsep import certify


def test_battery_passes_end_to_end():
    results = certify.run_all(seed=424242)
    assert certify.all_passed(results)
    names = [r.name for r in results]
    assert len(names) == len(set(names)) >= 8


def test_format_results():
    results = certify.run_all(seed=7)
    text = certify.format_results(results)
    assert f"{len(results)}/{len(results)} checks passed" in text
    for r in results:
        assert r.line() in text
        assert r.line().startswith("[PASS] ")


def test_failure_is_reported(monkeypatch):
    import cohsep.sensitivity

    monkeypatch.setattr(cohsep.sensitivity, "m0_closed", lambda sc: -1.0)
    results = certify.run_all(seed=7)
    assert not certify.all_passed(results)
    bad = [r for r in results if not r.passed]
    assert bad and all(b.line().startswith("[FAIL] ") for b in bad)
