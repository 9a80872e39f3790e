import pytest
import torch
import torch.nn.functional as F

from croptrainer import PRESETS, SmallUNet, TrainingError, build_model, logits_of


class TestSmallPreset:
    def test_forward_shape_matches_input(self):
        model = build_model("small", in_channels=3, num_classes=3)
        x = torch.randn(2, 3, 64, 64)
        out = logits_of(model(x))
        assert out.shape == (2, 3, 64, 64)

    def test_softmax_over_classes_sums_to_one(self):
        model = build_model("small", in_channels=3, num_classes=3)
        model.eval()
        with torch.no_grad():
            out = logits_of(model(torch.randn(1, 3, 64, 64)))
        sums = F.softmax(out, dim=1).sum(dim=1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-5)

    def test_accepts_other_channel_and_class_counts(self):
        model = build_model("small", in_channels=4, num_classes=5)
        with torch.no_grad():
            out = logits_of(model(torch.randn(1, 4, 32, 32)))
        assert out.shape == (1, 5, 32, 32)

    def test_is_desk_scale(self):
        # the point of the preset: trainable on a laptop CPU
        model = SmallUNet(in_channels=3, num_classes=3)
        n_params = sum(p.numel() for p in model.parameters())
        assert n_params < 500_000


class TestResnet101Preset:
    def test_builds_and_forwards(self):
        model = build_model("resnet101", in_channels=3, num_classes=3)
        model.eval()
        with torch.no_grad():
            out = logits_of(model(torch.randn(1, 3, 64, 64)))
        assert out.shape == (1, 3, 64, 64)

    def test_rejects_non_rgb_input(self):
        with pytest.raises(TrainingError, match="3-channel input"):
            build_model("resnet101", in_channels=4, num_classes=3)


class TestPresetRegistry:
    def test_known_presets(self):
        assert PRESETS == ("small", "resnet101")

    def test_unknown_preset_raises(self):
        with pytest.raises(TrainingError, match="unknown model preset"):
            build_model("mystery", in_channels=3, num_classes=3)

    def test_logits_of_passthrough_and_dict(self):
        t = torch.zeros(1, 3, 8, 8)
        assert logits_of(t) is t
        assert logits_of({"out": t}) is t
