import csv
import json

import numpy as np
import pytest

from sfp.errors import ConfigError, ImageIOError, NumericalError, ParamError
from sfp.image_core import load_image, quantize, save_image
from sfp.oracle import clean_scene, synthesize_haze, synthetic_corpus
from sfp.pipeline import (ABLATION_ARMS, SUMMARY_COLUMNS, PipelineConfig,
                          RecoveryReport, ablation_stats, image_paths,
                          load_pairs, output_names, parse_airlight, recover,
                          run_batch, run_single, run_stats,
                          synthesize_directory)
from sfp.results_file import ResultsFile

FAST = dict(patch_radius=3, gf_radius=4)
ALL_OFF = dict(no_sdp=True, no_fdp=True, naive_fusion=True, no_pp=True)


def test_config_defaults_and_validation():
    config = PipelineConfig()
    assert config.patch_radius == 7 and config.gf_radius == 16
    assert config.beta_lo == 1e-4 and config.beta_hi == 0.75
    assert config.uciqe_coeffs == (0.4680, 0.2745, 0.2576)
    for bad in (dict(patch_radius=0), dict(gf_eps=-1.0),
                dict(beta_lo=0.5, beta_hi=0.1), dict(target_phi=1.5),
                dict(rho_norm='radians'), dict(no_sdp='yes'),
                dict(threads=1.5), dict(uciqe_coeffs=(1, 2))):
        with pytest.raises(ConfigError):
            PipelineConfig(**bad)


def test_config_from_dict_and_file(tmp_path):
    config = PipelineConfig.from_dict({'gf_radius': 8,
                                       'uciqe_coeffs': [1, 0, 0]})
    assert config.gf_radius == 8 and config.uciqe_coeffs == (1, 0, 0)
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({'gf_raduis': 8})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict([1, 2])

    path = tmp_path / 'config.json'
    path.write_text(json.dumps(config.to_dict()))
    assert PipelineConfig.from_file(path) == config
    path.write_text('{not json')
    with pytest.raises(ConfigError):
        PipelineConfig.from_file(path)
    with pytest.raises(ConfigError):
        PipelineConfig.from_file(tmp_path / 'missing.json')


def test_config_updated_ignores_none():
    config = PipelineConfig().updated(gf_radius=5, patch_radius=None)
    assert config.gf_radius == 5 and config.patch_radius == 7
    with pytest.raises(ConfigError):
        config.updated(colour=True)
    with pytest.raises(ConfigError):
        config.updated(gf_radius=-2)


def test_recover_full_pipeline(scene_image):
    config = PipelineConfig(timings=True, **FAST)
    output, report, intermediates = recover(scene_image, config)
    assert output.shape == scene_image.shape
    assert 0.0 <= output.min() and output.max() <= 1.0
    assert set(intermediates) == {'transmission', 'sdp', 'fdp'}
    data = report.to_dict()
    assert data['width'] == 48 and data['height'] == 48
    assert all(v is not None for v in data['frequency']['phi_before'].values())
    assert all(v is not None for v in data['spatial']['atmosphere'].values())
    assert abs(sum(w['a'] for w in data['fusion']['weights'].values())
               - 1.0) < 1e-12
    assert set(data['timings']) == {'spatial', 'frequency', 'fusion', 'total'}
    assert all(v >= 0 for v in data['timings'].values())
    json.loads(report.to_json())


def test_recover_dark_channel_estimator(scene_image):
    config = PipelineConfig(transmission='dcp', **FAST)
    _, report, _ = recover(scene_image, config)
    assert report.spatial.direction is None
    assert report.to_dict()['spatial']['degenerate'] is False
    assert report.to_dict()['config']['transmission'] == 'dcp'


def test_all_stages_off_passes_through(scene_image):
    output, report, intermediates = recover(scene_image,
                                            PipelineConfig(**ALL_OFF))
    assert np.array_equal(quantize(output), quantize(scene_image))
    assert intermediates == {}
    data = report.to_dict()
    assert data['spatial']['transmission']['mean'] is None
    assert data['frequency']['mu'] is None
    assert data['fusion']['weights']['I']['a'] is None
    assert data['timings']['total'] is None


def test_report_key_order_is_fixed(scene_image):
    full = recover(scene_image, PipelineConfig(**FAST))[1]
    bare = recover(scene_image, PipelineConfig(**ALL_OFF))[1]
    assert full.summary_row().keys() == bare.summary_row().keys()
    assert list(full.summary_row()) == SUMMARY_COLUMNS
    assert SUMMARY_COLUMNS[:2] == ['input', 'errors']


def test_report_rejects_non_finite():
    report = RecoveryReport(input='x.png')
    report.uciqe_output = float('nan')
    with pytest.raises(NumericalError):
        report.to_json()


def test_recovery_improves_synthetic_haze():
    clean = 0.1 * clean_scene(64, seed=8, gray=True)
    scene = synthesize_haze(clean, 'linear-ramp', beta_s=6.0, A=(1, 1, 1))
    output, _, intermediates = recover(scene.degraded,
                                       PipelineConfig(no_fdp=True, no_pp=True))
    error_in = np.mean((scene.degraded - clean) ** 2)
    assert np.mean((intermediates['sdp'] - clean) ** 2) < error_in


def test_run_single_writes_outputs(tmp_path, image_dir):
    outdir = tmp_path / 'out'
    config = PipelineConfig(emit_intermediate=True, emit_h5=True, **FAST)
    report = run_single(image_dir / 'a.png', config, outdir)
    for suffix in ('.sfp.png', '.t.png', '.sdp.png', '.fdp.png', '.json',
                   '.h5'):
        assert (outdir / ('a' + suffix)).is_file()
    data = json.loads((outdir / 'a.json').read_text(encoding='utf-8'))
    assert data['input'] == str(image_dir / 'a.png')
    assert data == report.to_dict()
    results = ResultsFile(outdir / 'a.h5', no_write=True)
    assert results.get_result_array('recovery', 'output').shape == (32, 32, 3)
    assert results.get_result('recovery', 'config.transmission') == 'sdp'


def test_run_single_pass_through_png(tmp_path, image_dir):
    run_single(image_dir / 'a.png', PipelineConfig(**ALL_OFF), tmp_path)
    assert np.array_equal(quantize(load_image(tmp_path / 'a.sfp.png')),
                          quantize(load_image(image_dir / 'a.png')))
    assert not (tmp_path / 'a.t.png').exists()


def test_reports_are_byte_stable(tmp_path, image_dir):
    config = PipelineConfig(**FAST)
    run_single(image_dir / 'b.png', config, tmp_path / 'one')
    run_single(image_dir / 'b.png', config, tmp_path / 'two')
    assert (tmp_path / 'one' / 'b.json').read_bytes() == \
        (tmp_path / 'two' / 'b.json').read_bytes()


def test_run_batch(tmp_path, image_dir):
    (image_dir / 'broken.png').write_bytes(b'\x89PNG garbage')
    (image_dir / 'notes.txt').write_text('skip me')
    summary = run_batch(image_dir, PipelineConfig(threads=2, **FAST),
                        tmp_path / 'out')
    assert list(summary['input']) == [str(image_dir / name)
                                      for name in ('a.png', 'b.png',
                                                   'broken.png')]
    assert list(summary['errors'][:2]) == ['', '']
    assert summary['errors'][2].startswith('FormatError')
    with open(tmp_path / 'out' / 'summary.csv', newline='',
              encoding='utf-8') as f:
        rows = list(csv.reader(f))
    assert rows[0] == SUMMARY_COLUMNS
    assert len(rows) == 4
    assert (tmp_path / 'out' / 'a.json').is_file()
    assert not (tmp_path / 'out' / 'broken.json').exists()


def test_run_batch_shared_stems(tmp_path, image_dir):
    (image_dir / 'a.jpg').write_bytes((image_dir / 'a.png').read_bytes())
    (image_dir / 'A.PNG.jpg').write_bytes((image_dir / 'b.png').read_bytes())
    outdir = tmp_path / 'out'
    summary = run_batch(image_dir, PipelineConfig(threads=2, **FAST), outdir)
    errors = dict(zip(summary['input'], summary['errors']))
    assert len(errors) == 4
    assert errors[str(image_dir / 'a.jpg')] == ''
    assert errors[str(image_dir / 'b.png')] == ''
    # 'a.png' and the stem of 'A.PNG.jpg' name the same outputs
    assert errors[str(image_dir / 'a.png')].startswith('ImageIOError')
    assert errors[str(image_dir / 'A.PNG.jpg')].startswith('ImageIOError')
    assert (outdir / 'a.jpg.sfp.png').is_file()
    assert (outdir / 'a.jpg.json').is_file()
    assert not (outdir / 'a.sfp.png').exists()
    assert not (outdir / 'a.json').exists()


def test_output_names(tmp_path):
    paths = [tmp_path / name for name in ('x.JPG', 'x.png', 'y.png')]
    assert output_names(paths) == ['x.JPG', 'x.png', 'y']


def test_run_batch_results_file_error(tmp_path, image_dir):
    outdir = tmp_path / 'out'
    (outdir / 'a.h5').mkdir(parents=True)
    summary = run_batch(image_dir, PipelineConfig(emit_h5=True, **FAST),
                        outdir)
    assert summary['errors'][0].startswith('ImageIOError')
    assert 'a.h5' in summary['errors'][0]
    assert summary['errors'][1] == ''
    assert (outdir / 'b.h5').is_file()


def test_run_batch_empty_directory(tmp_path):
    (tmp_path / 'empty').mkdir()
    summary = run_batch(tmp_path / 'empty', outdir=tmp_path / 'out')
    assert len(summary) == 0
    text = (tmp_path / 'out' / 'summary.csv').read_text(encoding='utf-8')
    assert text.strip().split(',') == SUMMARY_COLUMNS


def test_image_paths(tmp_path, image_dir):
    (image_dir / 'C.JPG').write_bytes(b'')
    assert [p.name for p in image_paths(image_dir)] == ['C.JPG', 'a.png',
                                                        'b.png']
    with pytest.raises(ImageIOError):
        image_paths(tmp_path / 'missing')


def test_load_pairs(tmp_path, image_dir):
    clean_dir = tmp_path / 'clean'
    clean_dir.mkdir()
    save_image(clean_scene(32, seed=1), clean_dir / 'a.png')
    pairs = load_pairs(image_dir, clean_dir)
    assert len(pairs) == 1
    assert pairs[0][0].shape == pairs[0][1].shape


def test_run_stats_modes():
    frame = run_stats('dc-diff', count=4, size=16)
    assert len(frame) == 12
    frame = run_stats('radial', count=2, size=32)
    assert len(frame) == 12
    assert sorted(set(frame['label'])) == ['clear', 'degraded']
    assert frame['phi'].between(0, 1).all()
    frame = run_stats('transmission-mse', PipelineConfig(patch_radius=3),
                      count=3, size=32)
    assert len(frame) == 3
    with pytest.raises(ParamError):
        run_stats('histogram')


def test_ablation_stats():
    scenes = synthetic_corpus(count=1, size=32, seed=1)
    frame = ablation_stats(scenes, PipelineConfig(**FAST))
    arms = [name for name, _ in ABLATION_ARMS]
    assert list(frame['arm']) == ['input', 'full', 'sdp-only', 'fdp-only'] + \
        arms[1:]
    assert np.isfinite(frame['psnr']).all()
    assert np.isfinite(frame['uciqe']).all()


def test_full_pipeline_improves_default_corpus():
    frame = run_stats('ablation')
    psnr = frame.pivot(index='scene', columns='arm', values='psnr')
    assert len(psnr) == 20
    assert (psnr['full'] > psnr['input']).mean() >= 0.9
    assert (psnr['full'] >= psnr['naive-fusion']).mean() >= 0.7


def test_parse_airlight():
    assert parse_airlight('0.9,0.8,0.7') == [0.9, 0.8, 0.7]
    for bad in ('0.9,0.8', '1.2,0.5,0.5', 'a,b,c', '0,0.5,0.5'):
        with pytest.raises(ParamError):
            parse_airlight(bad)


def test_synthesize_directory(tmp_path, image_dir):
    manifest = synthesize_directory(image_dir, tmp_path / 'hazy', beta_s=1.5,
                                    airlight=(0.9, 0.9, 0.9),
                                    profile='radial', seed=3)
    assert [entry['seed'] for entry in manifest] == [3, 4]
    for stem in ('a', 'b'):
        assert (tmp_path / 'hazy' / (stem + '.haze.png')).is_file()
        assert (tmp_path / 'hazy' / (stem + '.tgt.png')).is_file()
    saved = json.loads((tmp_path / 'hazy' / 'synth.json').read_text())
    assert saved['scenes'] == manifest
