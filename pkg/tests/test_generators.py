import pytest

from slpfo.generators import chain, generate, grid_strip, ptree, random_apex
from slpfo.slp import (DecompressionTooLarge, decompress, format_slp, slp_size, val_degree,
                       val_node_count, validate)
from slpfo.structures import max_degree


def test_ptree_three():
    s = decompress(ptree(3)).structure
    leaves = [v for v in range(s.n) if not any(a == v for a, _ in s.relations["e"])]
    assert s.n == 15 and len(leaves) == 8


def test_ptree_forty_is_small_but_huge():
    slp = ptree(40)
    assert val_node_count(slp) == 2 ** 41 - 1
    sizes = [slp_size(ptree(n)) for n in (10, 20, 40)]
    assert sizes[2] - sizes[1] == 2 * (sizes[1] - sizes[0])
    with pytest.raises(DecompressionTooLarge):
        decompress(slp)


def test_chain_and_grid():
    s = decompress(chain(1)).structure
    assert s.n == 2 and s.relations["e"] == {(0, 1)}
    g = decompress(grid_strip(3)).structure
    assert g.n == 8 and len(g.relations["h"]) == 6 and len(g.relations["v"]) == 4


@pytest.mark.parametrize("slp", [ptree(4), chain(5), grid_strip(4), random_apex(5)])
def test_families_are_valid_apex(slp):
    rep = validate(slp)
    assert rep.ok and rep.apex
    assert val_degree(slp) == max_degree(decompress(slp).structure)


def test_seed_determines_instance():
    assert format_slp(random_apex(17)) == format_slp(random_apex(17))
    assert format_slp(generate("random-apex", seed=3)) == format_slp(random_apex(3))


def test_generate_errors():
    with pytest.raises(ValueError):
        generate("ptree")
    with pytest.raises(ValueError):
        generate("torus", 3)
    with pytest.raises(ValueError):
        ptree(0)
