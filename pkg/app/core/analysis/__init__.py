from app.core.analysis.changepoints import ChangePointConfig, changepoint_concentration, pelt_changepoints
from app.core.analysis.lemmatizer import Lemmatizer, lemmatize
from app.core.analysis.links import outbound_links, outbound_policy_links
from app.core.analysis.matchers import Matcher, load_matchers, match_terms, validate_matchers
from app.core.analysis.placeholders import normalize_placeholders
from app.core.analysis.text_metrics import fkgl, word_count
from app.core.analysis.trends import TermSeries, score_gain, score_pos_slope2, surface_trends
from app.core.analysis.updates import UpdateStatus, detect_updates, similarity_ratio, update_length

__all__ = [
    "ChangePointConfig",
    "Lemmatizer",
    "Matcher",
    "TermSeries",
    "UpdateStatus",
    "changepoint_concentration",
    "detect_updates",
    "fkgl",
    "lemmatize",
    "load_matchers",
    "match_terms",
    "normalize_placeholders",
    "outbound_links",
    "outbound_policy_links",
    "pelt_changepoints",
    "score_gain",
    "score_pos_slope2",
    "similarity_ratio",
    "surface_trends",
    "update_length",
    "validate_matchers",
    "word_count",
]
