import pytest

from sfp.errors import ParamError
from sfp.oracle import synthetic_corpus
from sfp.pipeline import STATS_MODES, PipelineConfig, run_stats
from sfp.plotting import plot_stats


@pytest.mark.parametrize('mode', STATS_MODES)
def test_plot_every_mode(tmp_path, mode):
    frame = run_stats(mode, PipelineConfig(patch_radius=3, gf_radius=4),
                      count=2, size=16)
    path = tmp_path / (mode + '.png')
    plot_stats(frame, mode, path)
    assert path.stat().st_size > 0


def test_unknown_mode(tmp_path):
    frame = run_stats('dc-diff', count=1, size=16)
    with pytest.raises(ParamError):
        plot_stats(frame, 'histogram', tmp_path / 'x.png')
