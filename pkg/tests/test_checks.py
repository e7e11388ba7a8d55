from qmc import checks


def test_repaired_forms_pass_every_check():
    assert checks.scalar_equations(corrected=True)["pass"]
    assert checks.fixtures(corrected=True)["pass"]
    assert checks.limits(corrected=True)["pass"]


def test_reports_share_keys_and_are_reproducible():
    a = checks.dr_correspondence(draws=3, seed=11)
    b = checks.dr_correspondence(draws=3, seed=11)
    assert a == b
    for rep in (a, checks.q_binomial(draws=5), checks.table1(draws=1)):
        assert {"check", "max_residual", "tol", "pass"} <= set(rep)


def test_single_pair_additivity():
    rep = checks.additivity(l1=0.3, l2=0.4)
    assert rep["pass"] and rep["pairs"] == 1


def test_scalar_subset():
    rep = checks.scalar_equations(["ghg3"], draws=1)
    assert rep["pass"] and list(rep["equations"]) == ["ghg3"]
