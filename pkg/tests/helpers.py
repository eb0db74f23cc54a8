from typing import Optional

from app.core.intervals import parse_interval
from app.core.models import AttemptRecord, PolicyDocument


def make_doc(
    site: str = "example.com",
    interval: str = "2015A",
    markdown: str = "",
    title: str = "",
    policy_url: Optional[str] = None,
) -> PolicyDocument:
    return PolicyDocument(
        site=site,
        interval=parse_interval(interval),
        policy_url=policy_url if policy_url is not None else f"http://{site}/privacy",
        policy_timestamp=f"{interval[:4]}0315000000",
        title=title,
        markdown=markdown,
    )


def make_record(site: str, interval: str = "2015A", outcome: str = "success", **fields) -> AttemptRecord:
    fields.setdefault("policy_url", f"http://{site}/privacy" if outcome == "success" else "")
    fields.setdefault("homepage_final_url", f"http://{site}/")
    return AttemptRecord(site=site, interval=interval, outcome=outcome, **fields)


def page(body: str, title: str = "Home") -> str:
    return f"<html><head><title>{title}</title></head><body>{body}</body></html>"
