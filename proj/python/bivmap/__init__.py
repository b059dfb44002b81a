"""Task-driven recommendation and rendering of bivariate uncertainty maps."""

import json

from . import _core
from ._core import BivmapError, bin_quantile, bin_threshold, casestudy_geojson, checksum, version

__all__ = [
    "BivmapError",
    "bin_attribute",
    "bin_quantile",
    "bin_threshold",
    "casestudy",
    "casestudy_geojson",
    "casestudy_request",
    "checksum",
    "recommend",
    "render_legend",
    "render_map",
    "table",
    "version",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def recommend(request, rules=None):
    """Run the recommender on a design request (dict or JSON text); returns the report dict."""
    return json.loads(_core.recommend(_text(request), rules))


def table(table_id, rules=None):
    return json.loads(_core.table(table_id, rules))


def bin_attribute(geojson, attribute, scheme):
    return json.loads(_core.bin(_text(geojson), attribute, _text(scheme)))


def render_map(geojson, request, rules=None):
    return _core.render_map(_text(geojson), _text(request), rules)


def render_legend(request, implantation="Area", rules=None):
    return _core.render_legend(_text(request), implantation, rules)


def casestudy_request():
    return json.loads(_core.casestudy_request())


def casestudy():
    """Files of the bundled case study as {name: text}."""
    return dict(_core.casestudy())
