import numpy as np
import pytest

from sliderfilm.geometry import DomainRect, SliderShape, TabulatedData, build_grid


@pytest.fixture
def domain_sym():
    """[-1, 1]^2, the workhorse domain."""
    return DomainRect(-1.0, 1.0, -1.0, 1.0)


@pytest.fixture
def unit_domain():
    """Unit square centered at the origin."""
    return DomainRect(-0.5, 0.5, -0.5, 0.5)


def tabulated_from(shape: SliderShape, grid):
    """Tabulated copy of an analytic shape on a grid lattice.

    The node counts must place a node on the contact set (odd nx for the
    symmetric domains used here), otherwise the min-height invariant of
    tabulated data rejects the table.
    """
    from sliderfilm.geometry import lattice_grad_x1, lattice_heights

    return SliderShape.tabulated(
        TabulatedData(
            xs=grid.xs,
            ys=grid.ys,
            heights=lattice_heights(shape, grid),
            grad_x1=lattice_grad_x1(shape, grid),
        )
    )


@pytest.fixture
def tabulated_line(domain_sym):
    grid = build_grid(domain_sym, 11, 11)
    return tabulated_from(SliderShape.line_contact(2.0), grid), grid


def all_variant_shapes(grid):
    """One shape per variant, tabulated derived from the line profile."""
    return [
        SliderShape.line_contact(2.0),
        SliderShape.point_contact(2.0),
        SliderShape.flat(),
        tabulated_from(SliderShape.line_contact(2.0), grid),
    ]
