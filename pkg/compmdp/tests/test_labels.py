import math

import pytest

from compmdp.core.exceptions import DanglingState
from compmdp.model.dist import Dist
from compmdp.model.labels import Atom, Glued, Left, Orbit, Pair, Right, as_label, canonical_form


class TestLabels:
    """Test structured identifiers."""

    def test_atom_rejects_whitespace(self):
        """Test atom names are restricted to the identifier alphabet."""
        with pytest.raises(ValueError):
            Atom("a b")
        with pytest.raises(ValueError):
            Atom("")

    def test_text_forms(self):
        """Test every label kind prints in its document form."""
        a, b = Atom("a"), Atom("b")
        assert str(Left(a)) == "L(a)"
        assert str(Right(a)) == "R(a)"
        assert str(Glued(a)) == "G(a)"
        assert str(Pair(a, Pair(a, b))) == "(a,(a,b))"
        assert str(Orbit([b, a, b])) == "{a,b}"

    def test_equality_is_structural(self):
        """Test equal structure means equal and hash-equal labels."""
        assert Pair(Atom("x"), Left(Atom("y"))) == Pair(Atom("x"), Left(Atom("y")))
        assert hash(Orbit([Atom("a"), Atom("b")])) == hash(Orbit([Atom("b"), Atom("a")]))
        assert Left(Atom("x")) != Right(Atom("x"))

    def test_total_order_by_kind_first(self):
        """Test atoms sort before wrapped labels and pairs."""
        labels = [Pair(Atom("a"), Atom("b")), Glued(Atom("a")), Atom("z"), Left(Atom("a"))]
        assert sorted(labels) == [Atom("z"), Left(Atom("a")), Glued(Atom("a")), Pair(Atom("a"), Atom("b"))]

    def test_pair_needs_two_parts(self):
        """Test a one-part pair is rejected."""
        with pytest.raises(ValueError):
            Pair(Atom("a"))

    def test_labels_are_immutable(self):
        """Test attribute assignment fails."""
        with pytest.raises(AttributeError):
            Atom("a").name = "b"

    def test_canonical_form(self):
        """Test construction tags that do not change identity are stripped."""
        x, y = Atom("x"), Atom("y")
        assert canonical_form(Glued(Left(x))) == x
        assert canonical_form(Pair(Right(x), x)) == x
        assert canonical_form(Orbit([Glued(x)])) == x
        assert canonical_form(Pair(Left(x), y)) == Pair(x, y)

    def test_as_label(self):
        """Test strings are promoted to atoms."""
        assert as_label("s1") == Atom("s1")
        assert as_label(Atom("s1")) is not None


class TestDist:
    """Test finite distributions."""

    def test_zero_mass_dropped(self):
        """Test support is exactly the positive-mass keys."""
        mu = Dist({Atom("a"): 0.0, Atom("b"): 1.0})
        assert mu.support() == frozenset({Atom("b")})
        assert len(mu) == 1

    def test_negative_and_nan_rejected(self):
        """Test invalid masses raise."""
        with pytest.raises(ValueError):
            Dist({Atom("a"): -0.1})
        with pytest.raises(ValueError):
            Dist({Atom("a"): math.nan})

    def test_duplicates_accumulate(self):
        """Test repeated keys in pair input add up."""
        mu = Dist([(Atom("a"), 0.25), (Atom("a"), 0.25), (Atom("b"), 0.5)])
        assert mu[Atom("a")] == 0.5

    def test_pushforward_merges_preimages(self):
        """Test the image mass is the preimage total."""
        a, b, c, z = Atom("a"), Atom("b"), Atom("c"), Atom("z")
        mu = Dist({a: 0.25, b: 0.25, c: 0.5})
        pushed = mu.pushforward({a: z, b: z, c: c})
        assert pushed == Dist({z: 0.5, c: 0.5})

    def test_pushforward_outside_domain(self):
        """Test a missing image raises DanglingState."""
        with pytest.raises(DanglingState):
            Dist.point(Atom("a")).pushforward({})

    def test_restrict_does_not_renormalize(self):
        """Test restriction keeps raw masses."""
        a, b = Atom("a"), Atom("b")
        assert Dist({a: 0.5, b: 0.5}).restrict({a}).total() == 0.5

    def test_distance_and_closeness(self):
        """Test sup-norm distance between mass functions."""
        a, b = Atom("a"), Atom("b")
        mu, nu = Dist({a: 0.5, b: 0.5}), Dist({a: 0.75, b: 0.25})
        assert mu.distance(nu) == 0.25
        assert not mu.is_close(nu, 0.1)
        assert mu.is_close(nu, 0.25)
