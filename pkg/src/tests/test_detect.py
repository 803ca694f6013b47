"""Tests for the five keypoint detectors."""
import logging
import math

import numpy as np
import pytest

from pyfeatbench.bench import repeatability
from pyfeatbench.combination_map import get_detector
from pyfeatbench.const import DetectorTypes
from pyfeatbench.detectors.brisk import brisk_detect
from pyfeatbench.detectors.fast import fast_detect
from pyfeatbench.detectors.orb import orb_detect
from pyfeatbench.detectors.sift import sift_detect
from pyfeatbench.detectors.surf import surf_detect
from pyfeatbench.imgcore import Image, gaussian_blur
from pyfeatbench.models.config_models import DetectorParams, OrbParams, SurfParams
from pyfeatbench.synthetic import SceneSettings, render_scene, render_view
from pyfeatbench.utils.errors import ImageSizeError, ParameterError
from base_test_cases import TestBase
from defaults import TestDefaults
from utils import naive_fast_corners, rotate_image

logger = logging.getLogger(__name__)


class TestFast(TestBase):
    """Segment-test corners."""

    def test_white_square_corners(self):
        """A bright square yields exactly its four corners."""
        keypoints = fast_detect(TestDefaults.white_square())
        assert len(keypoints) == 4
        for kp in keypoints:
            corners = TestDefaults.square_corners()
            assert min(math.hypot(kp.x - cx, kp.y - cy) for cx, cy in corners) <= 1.0
            assert kp.scale == 7.0
            assert kp.orientation == 0.0
            assert kp.response > 0

    @pytest.mark.parametrize(('threshold', 'arc'), [(10, 9), (30, 9), (15, 12)])
    def test_matches_pixel_segment_test(self, threshold, arc):
        """Without suppression every pixel passing the segment test is found."""
        img = self.textured(48, 40)
        found = {
            (int(kp.x), int(kp.y))
            for kp in fast_detect(img, threshold, arc, nonmax=False)
        }
        assert found == naive_fast_corners(img.data, threshold, arc)

    def test_matches_pixel_segment_test_on_noise(self):
        """Random 64x64 images agree with the pixel segment test."""
        for _ in range(50):
            data = self.rng.integers(0, 256, (64, 64), dtype=np.uint8)
            threshold = int(self.rng.integers(5, 60))
            arc = int(self.rng.integers(9, 13))
            found = {
                (int(kp.x), int(kp.y))
                for kp in fast_detect(Image(data), threshold, arc, nonmax=False)
            }
            assert found == naive_fast_corners(data, threshold, arc)

    def test_raster_order(self):
        """Corners come out row by row."""
        keypoints = fast_detect(self.textured(64, 64), 10)
        order = [(kp.y, kp.x) for kp in keypoints]
        assert order == sorted(order)

    def test_higher_threshold_gives_subset(self):
        """Raising the threshold only removes corners."""
        img = self.textured(96, 96)
        previous = None
        for threshold in (5, 10, 20, 40):
            found = {kp.position for kp in fast_detect(img, threshold)}
            if previous is not None:
                assert found <= previous
            previous = found

    def test_flat_image(self):
        """A constant image has no corners."""
        assert fast_detect(TestDefaults.constant(32, 32)) == []

    def test_invalid_parameters(self):
        """Threshold and arc are range checked."""
        img = TestDefaults.white_square()
        with pytest.raises(ParameterError):
            fast_detect(img, threshold=0)
        with pytest.raises(ParameterError):
            fast_detect(img, arc=8)
        with pytest.raises(ParameterError):
            fast_detect(img, arc=13)


class TestDetectors(TestBase):
    """Properties every detector shares."""

    detectors = list(DetectorTypes)

    def test_flat_image(self, detector):
        """A constant image has no keypoints."""
        assert get_detector(detector).detect(TestDefaults.constant()) == []

    def test_keypoint_ranges(self, detector):
        """Keypoints lie inside the image with valid scale and orientation."""
        img = self.textured(128, 128)
        keypoints = get_detector(detector).detect(img)
        assert keypoints
        for kp in keypoints:
            assert 0.0 <= kp.x < img.width
            assert 0.0 <= kp.y < img.height
            assert kp.scale > 0.0
            assert 0.0 <= kp.orientation < 2 * math.pi
            assert kp.response >= 0.0

    def test_deterministic(self, detector):
        """The same image gives the same keypoints."""
        img = self.textured(96, 96)
        found = get_detector(detector).detect(img)
        assert get_detector(detector).detect(img) == found

    def test_too_small(self, detector):
        """Images below the detector minimum are rejected."""
        with pytest.raises(ImageSizeError):
            get_detector(detector).detect(TestDefaults.constant(6, 6))

    def test_logs_count(self, detector):
        """Detection logs the number of keypoints found."""
        get_detector(detector).detect(self.textured(96, 96))
        assert 'keypoints on 96x96 image' in self.caplog.text


class TestScaleDetectors(TestBase):
    """Detector-specific behaviour."""

    def test_sift_blob(self):
        """A Gaussian blob is found at its centre with a matching scale."""
        sigma = TestDefaults.blob_sigma
        keypoints = sift_detect(TestDefaults.gaussian_blob(sigma=sigma))
        assert keypoints
        nearest = min(keypoints, key=lambda kp: math.hypot(kp.x - 64, kp.y - 64))
        assert math.hypot(nearest.x - 64, nearest.y - 64) <= 1.5
        assert 0.5 * sigma <= nearest.scale <= 1.6 * sigma

    def test_surf_threshold(self):
        """Responses reach the threshold and a higher threshold keeps fewer."""
        img = self.textured(128, 128)
        low = surf_detect(img, DetectorParams(surf=SurfParams(hessian_thresh=200)))
        high = surf_detect(img, DetectorParams(surf=SurfParams(hessian_thresh=2000)))
        assert len(high) <= len(low)
        assert all(kp.response >= 2000 for kp in high)

    def test_orb_feature_cap(self):
        """At most n_features keypoints by decreasing response."""
        params = DetectorParams(orb=OrbParams(n_features=25))
        keypoints = orb_detect(self.textured(128, 128), params)
        assert 0 < len(keypoints) <= 25
        responses = [kp.response for kp in keypoints]
        assert responses == sorted(responses, reverse=True)
        assert {kp.octave for kp in keypoints} <= set(range(params.orb.levels))

    def test_orb_scale_grows_with_level(self):
        """Patch size scales with the pyramid level."""
        for kp in orb_detect(self.textured(160, 160)):
            assert kp.scale == pytest.approx(31 * 1.2**kp.octave)

    def test_sift_scale_grows_with_blob(self):
        """A wider blob is found at a larger scale."""
        scales = []
        for sigma in (3.0, 6.0):
            keypoints = sift_detect(TestDefaults.gaussian_blob(sigma=sigma))
            central = [kp for kp in keypoints if math.hypot(kp.x - 64, kp.y - 64) <= 1.5]
            assert central
            scales.append(max(central, key=lambda kp: kp.response).scale)
        assert scales[1] > scales[0]

    def test_brisk_uses_fast_arc(self):
        """A longer FAST arc leaves BRISK fewer keypoints."""
        img = self.textured(128, 128)
        strict = brisk_detect(img, DetectorParams(fast_arc=12))
        assert len(strict) < len(brisk_detect(img))

    @pytest.mark.parametrize(
        ('method', 'least'), [(DetectorTypes.ORB, 0.5), (DetectorTypes.SIFT, 0.4)]
    )
    def test_repeatability_under_a_turn(self, method, least):
        """Keypoints reappear within 2 px after a 15 degree turn of a scene."""
        centre = (112.0, 112.0)
        cos, sin = math.cos(math.radians(15.0)), math.sin(math.radians(15.0))

        def turn(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            dx, dy = xs - centre[0], ys - centre[1]
            return centre[0] + cos * dx - sin * dy, centre[1] + sin * dx + cos * dy

        detector = get_detector(method)
        scores = []
        for seed in (11, 12):
            settings = SceneSettings(width=224, height=224, seed=seed)
            view = render_view(render_scene(settings, 0), settings, 1, 0)
            img = gaussian_blur(view, 1.0)
            inner = [
                kp
                for kp in detector.detect(img)
                if math.hypot(kp.x - centre[0], kp.y - centre[1]) <= 80
            ]
            assert inner
            turned = detector.detect(rotate_image(img, 15.0, centre))
            scores.append(repeatability(inner, turned, turn, tol=2.0))
        assert np.mean(scores) >= least
