import json
from pathlib import Path

import pytest

from belief import Frame
from campaign_io import CampaignConfig
from monitor import Contribution

AUDIO_LABELS = ("mauvais", "pauvre", "correct", "bon", "excellent")
FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def frame5():
    return Frame(AUDIO_LABELS)


@pytest.fixture
def config5():
    return CampaignConfig(answer_labels=AUDIO_LABELS)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"answer_labels": list(AUDIO_LABELS)}, ensure_ascii=False),
                    encoding="utf-8")
    return path


def make_contribution(cid="c1", qid="q1", answer=0b1, w=0.75, t=10.0, hit="h1"):
    return Contribution(
        contributor_id=cid,
        hit_id=hit,
        question_id=qid,
        answer=answer,
        confidence_w=w,
        response_time_s=t,
    )


def write_text(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path
