"""Tests for descriptor containers and the five extractors."""
import logging
import math

import numpy as np
import pytest

from pyfeatbench.base_features.descriptor_base import Descriptor, DescriptorSet
from pyfeatbench.combination_map import get_descriptor
from pyfeatbench.const import DescriptorKind, DescriptorTypes
from pyfeatbench.descriptors.brief import brief_describe
from pyfeatbench.descriptors.brisk import brisk_describe
from pyfeatbench.descriptors.orb import orb_describe
from pyfeatbench.descriptors.sift import sift_describe
from pyfeatbench.detectors.fast import fast_detect
from pyfeatbench.imgcore import Image
from pyfeatbench.match import brute_force_match, distance_matrix, hamming
from pyfeatbench.models.feature_models import Keypoint
from pyfeatbench.utils.errors import DescriptorMismatchError
from base_test_cases import TestBase
from defaults import TestDefaults
from utils import lit_texture, rotate_image, rotate_keypoints

logger = logging.getLogger(__name__)


class TestDescriptorSet(TestBase):
    """Row layout of descriptor sets."""

    def test_layout(self):
        """Binary rows are packed bytes, real rows float32 components."""
        bits = self.rng.integers(0, 2, (3, 256)).astype(bool)
        packed = DescriptorSet.from_bits(DescriptorTypes.BRIEF, bits)
        assert packed.values.shape == (3, 32)
        assert packed.kind is DescriptorKind.BINARY
        assert packed.length == 256
        assert np.array_equal(packed[1].bits().astype(bool), bits[1])
        assert DescriptorSet.empty(DescriptorTypes.BRISK).values.shape == (0, 64)
        assert DescriptorSet.empty(DescriptorTypes.SIFT).values.dtype == np.float32
        assert not packed.values.flags.writeable

    def test_wrong_width(self):
        """Rows of the wrong width are rejected."""
        with pytest.raises(DescriptorMismatchError):
            DescriptorSet(DescriptorTypes.SURF, np.zeros((2, 128), dtype=np.float32))
        with pytest.raises(DescriptorMismatchError):
            Descriptor.from_bytes(DescriptorTypes.ORB, bytes(31))
        with pytest.raises(DescriptorMismatchError):
            Descriptor(DescriptorTypes.SIFT, np.zeros(128, dtype=np.float32)).bits()

    def test_compatibility(self):
        """Sets match when kind and length agree."""
        brief = DescriptorSet.empty(DescriptorTypes.BRIEF)
        assert brief.compatible_with(DescriptorSet.empty(DescriptorTypes.ORB))
        assert not brief.compatible_with(DescriptorSet.empty(DescriptorTypes.BRISK))
        assert not DescriptorSet.empty(DescriptorTypes.SIFT).compatible_with(
            DescriptorSet.empty(DescriptorTypes.SURF)
        )

    def test_descriptor_bytes(self):
        """A real descriptor survives its byte encoding."""
        values = self.rng.random(64).astype(np.float32)
        descriptor = Descriptor(DescriptorTypes.SURF, values)
        raw = descriptor.to_bytes()
        assert len(raw) == 256
        assert Descriptor.from_bytes(DescriptorTypes.SURF, raw) == descriptor


class TestExtractors(TestBase):
    """Properties every extractor shares."""

    descriptors = list(DescriptorTypes)

    def keypoints(self, img: Image) -> list[Keypoint]:
        """FAST corners of an image."""
        return fast_detect(img, 15)

    def test_rows_follow_kept_keypoints(self, descriptor):
        """One row per kept keypoint, kept keypoints in input order."""
        img = self.textured(128, 128)
        keypoints = self.keypoints(img)
        kept, values = get_descriptor(descriptor).describe(img, keypoints)
        assert kept
        assert len(values) == len(kept)
        assert values.method == descriptor
        positions = [kp.position for kp in keypoints]
        indices = [positions.index(kp.position) for kp in kept]
        assert indices == sorted(indices)

    def test_no_keypoints(self, descriptor):
        """No keypoints give an empty set."""
        kept, values = get_descriptor(descriptor).describe(self.textured(64, 64), [])
        assert kept == []
        assert len(values) == 0
        assert values.method == descriptor

    def test_deterministic(self, descriptor):
        """The same input gives the same rows."""
        img = self.textured(96, 96)
        keypoints = self.keypoints(img)
        _, first = get_descriptor(descriptor).describe(img, keypoints)
        _, second = get_descriptor(descriptor).describe(img, keypoints)
        assert np.array_equal(first.values, second.values)

    def test_duplicate_keypoints(self, descriptor):
        """Identical keypoints get identical rows."""
        img = self.textured(128, 128)
        keypoint = Keypoint(64.0, 64.0, 7.0)
        kept, values = get_descriptor(descriptor).describe(img, [keypoint, keypoint])
        assert len(kept) == 2
        assert np.array_equal(values.values[0], values.values[1])

    def test_orientation_range(self, descriptor):
        """Kept orientations stay in [0, 2*pi)."""
        img = self.textured(128, 128)
        kept, _ = get_descriptor(descriptor).describe(img, self.keypoints(img))
        assert all(0.0 <= kp.orientation < 2 * math.pi for kp in kept)

    def test_matches_itself(self, descriptor):
        """A set matched against itself finds rows at distance zero."""
        img = self.textured(128, 128)
        _, values = get_descriptor(descriptor).describe(img, self.keypoints(img))
        matches = brute_force_match(values, values)
        assert len(matches) == len(values)
        for match in matches:
            assert match.distance == 0.0
            assert np.array_equal(
                values.values[match.query_idx], values.values[match.train_idx]
            )


class TestExtractorDetails(TestBase):
    """Extractor-specific behaviour."""

    def test_brief_drops_border_keypoints(self):
        """BRIEF needs the whole 31x31 patch inside the image."""
        img = self.textured(64, 64)
        inner = Keypoint(32.0, 32.0, 7.0)
        kept, values = brief_describe(img, [Keypoint(2.0, 2.0, 7.0), inner])
        assert kept == [inner]
        assert len(values) == 1
        assert 'kept 1 of 2 keypoints' in self.caplog.text

    def test_brief_seed_changes_pattern(self):
        """Different seeds draw different test pairs."""
        img = self.textured(96, 96)
        keypoints = self.keypoints_for(img)
        _, first = brief_describe(img, keypoints, seed=1)
        _, second = brief_describe(img, keypoints, seed=2)
        assert not np.array_equal(first.values, second.values)

    @pytest.mark.parametrize('method', [DescriptorTypes.SIFT, DescriptorTypes.SURF])
    def test_real_rows_unit_norm(self, method):
        """Real descriptors keep border keypoints and have unit length."""
        img = self.textured(128, 128)
        keypoints = [Keypoint(1.0, 1.0, 3.0), *self.keypoints_for(img)]
        kept, values = get_descriptor(method).describe(img, keypoints)
        assert len(kept) == len(keypoints)
        norms = np.linalg.norm(values.values, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-5)

    def test_sift_rotation(self):
        """A quarter turn of the image leaves the SIFT descriptor nearly unchanged."""
        img = self.textured(128, 128)
        rotated = Image(np.ascontiguousarray(np.rot90(img.data)))
        x, y = 64.0, 64.0
        _, first = sift_describe(img, [Keypoint(x, y, 2.5)])
        _, second = sift_describe(rotated, [Keypoint(y, img.width - 1 - x, 2.5)])
        assert np.linalg.norm(first.values[0] - second.values[0]) < 0.25

    @staticmethod
    def keypoints_for(img: Image) -> list[Keypoint]:
        """FAST corners of an image."""
        return fast_detect(img, 15)


class TestTurnedImages(TestBase):
    """Descriptors of images turned about a keypoint."""

    descriptors = [
        DescriptorTypes.ORB,
        DescriptorTypes.BRISK,
        DescriptorTypes.SIFT,
        DescriptorTypes.SURF,
    ]

    @staticmethod
    def rings(size: int = 65, period: float = 7.0) -> Image:
        """Concentric cosine rings around the centre pixel of an odd square."""
        half = size // 2
        ys, xs = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
        radius = np.sqrt(xs * xs + ys * ys)
        return Image.from_array(128.0 + 90.0 * np.cos(2 * math.pi * radius / period))

    def test_orb_equals_brief_unturned(self):
        """At orientation 0 and the base patch size ORB samples like BRIEF."""
        img = self.textured(96, 96)
        keypoints = [Keypoint(48.0, 48.0, 31.0), Keypoint(30.0, 60.0, 31.0)]
        brief_kept, brief = brief_describe(img, keypoints)
        orb_kept, orb = orb_describe(img, keypoints)
        assert len(brief_kept) == len(orb_kept) == 2
        assert np.array_equal(brief.values, orb.values)

    def test_brief_ignores_brightness_offset(self):
        """Adding a constant to every pixel keeps every BRIEF bit."""
        dark = Image(self.textured(96, 96).data // 2)
        bright = Image(dark.data + 50)
        keypoints = [
            Keypoint(float(x), float(y), 7.0)
            for x in range(20, 77, 8)
            for y in range(20, 77, 8)
        ]
        _, first = brief_describe(dark, keypoints)
        _, second = brief_describe(bright, keypoints)
        assert len(first) == len(keypoints)
        assert np.array_equal(first.values, second.values)

    def test_orb_follows_a_turn(self):
        """Steered ORB survives a 30 degree turn that unsteered BRIEF does not."""
        centre = (64.0, 64.0)
        keypoint = Keypoint(*centre, 31.0)
        for _ in range(3):
            img = TestDefaults.textured(self.rng, 128, 128, sigma=2.5)
            turned = rotate_image(img, 30.0, centre)
            [moved] = rotate_keypoints([keypoint], 30.0, centre)
            _, orb_before = orb_describe(img, [keypoint])
            _, orb_after = orb_describe(turned, [moved])
            _, brief_before = brief_describe(img, [keypoint])
            _, brief_after = brief_describe(turned, [moved])
            steered = hamming(orb_before[0], orb_after[0])
            assert steered <= 64
            assert hamming(brief_before[0], brief_after[0]) > steered

    def test_brisk_rings_quarter_turns(self):
        """Turning concentric rings by quarter turns keeps BRISK within 51 bits."""
        img = self.rings()
        keypoint = Keypoint(32.0, 32.0, 7.0, 0.3)
        _, before = brisk_describe(img, [keypoint])
        for turns in (1, 2, 3):
            turned = Image(np.ascontiguousarray(np.rot90(img.data, turns)))
            orientation = (0.3 - turns * math.pi / 2) % (2 * math.pi)
            kept, after = brisk_describe(turned, [Keypoint(32.0, 32.0, 7.0, orientation)])
            assert len(kept) == 1
            assert hamming(before[0], after[0]) <= 51

    @pytest.mark.parametrize(
        ('method', 'limit'),
        [
            (DescriptorTypes.BRISK, 102),
            (DescriptorTypes.SIFT, 0.45),
            (DescriptorTypes.SURF, 0.45),
        ],
    )
    def test_estimated_orientation_follows_a_turn(self, method, limit):
        """With orientation estimated, a 15 degree turn keeps descriptors close."""
        centre = (80.0, 80.0)
        keypoint = Keypoint(*centre, 2.0)
        extractor = get_descriptor(method)
        distances = []
        for _ in range(3):
            img = lit_texture(self.rng, 160)
            _, before = extractor.describe(img, [keypoint])
            _, after = extractor.describe(rotate_image(img, 15.0, centre), [keypoint])
            block = distance_matrix(before.values, after.values, before.kind)
            distances.append(float(block[0, 0]))
        assert np.mean(distances) <= limit

    def test_turned_keypoints_find_their_counterpart(self, descriptor):
        """After a 15 degree turn a keypoint is nearest its own original."""
        centre = (96.0, 96.0)
        img = TestDefaults.textured(self.rng, 192, 192, sigma=2.5)
        grid = np.linspace(-40.0, 40.0, 10)
        xs, ys = np.meshgrid(grid + centre[0], grid + centre[1])
        xs += self.rng.uniform(-1.5, 1.5, xs.shape)
        ys += self.rng.uniform(-1.5, 1.5, ys.shape)
        keypoints = [
            Keypoint(x, y, 7.0)
            for x, y in zip(xs.ravel().tolist(), ys.ravel().tolist(), strict=True)
        ]
        extractor = get_descriptor(descriptor)
        kept, before = extractor.describe(img, keypoints)
        moved, after = extractor.describe(
            rotate_image(img, 15.0, centre), rotate_keypoints(kept, 15.0, centre)
        )
        assert len(kept) == len(moved) == 100
        distances = distance_matrix(before.values, after.values, before.kind)
        own = np.diag(distances)
        nearer = (distances < own[:, None]).sum(axis=1) / 99
        assert nearer.mean() <= 0.05
