import numpy as np
import pytest

from models.records import FrameRecord, VideoSequence
from seqprep import (
    FeatureStore,
    align_dataset,
    align_modalities,
    batch_iterator,
    block_sequences,
    clip_slot_count,
    collate,
    dataset_stats,
    format_stats,
    parse_manifest,
    read_clip_table,
    read_feature_file,
    vector_block,
    write_feature_file,
    write_manifest,
)
from seqprep.features import AUDIO_FUNCTIONAL_DIM, AUDIO_LLD_DIM
from utils.errors import AlignmentError, ContractError, FeatureFileError, ManifestError, ShapeError


def make_sequence(video_id: str, length: int, label: int = 0, step: int = 1) -> VideoSequence:
    frames = [
        FrameRecord(video_id=video_id, frame_index=i * step, visual_path=f"{video_id}.csv", label=label)
        for i in range(length)
    ]
    return VideoSequence(video_id=video_id, frames=frames, label=label)


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


@pytest.fixture
def feature_dir(tmp_path):
    (tmp_path / "v.csv").write_text("0,1.0\n", encoding="utf-8")
    (tmp_path / "a.csv").write_text("0,1.0\n", encoding="utf-8")
    return tmp_path


class TestManifest:
    def test_groups_frames_by_video(self, three_video_manifest):
        sequences = parse_manifest(three_video_manifest)
        assert [s.video_id for s in sequences] == ["clip_a", "clip_b", "clip_c"]
        assert [s.true_length for s in sequences] == [3, 2, 4]
        assert [s.label for s in sequences] == [0, 3, 3]
        assert all(not s.has_audio for s in sequences)

    def test_rewrite_is_byte_exact(self, three_video_manifest, tmp_path):
        out = write_manifest(parse_manifest(three_video_manifest), tmp_path / "copy.tsv")
        assert out.read_bytes() == three_video_manifest.read_bytes()

    def test_audio_column(self, feature_dir):
        path = write_lines(feature_dir / "m.tsv", ["v1\tSad\t0\tv.csv\ta.csv", "v1\tSad\t2\tv.csv\ta.csv"])
        (seq,) = parse_manifest(path)
        assert seq.has_audio
        assert [f.frame_index for f in seq.frames] == [0, 2]
        assert seq.frames[0].audio_path == "a.csv"

    def test_blank_lines_are_skipped(self, feature_dir):
        path = write_lines(feature_dir / "m.tsv", ["v1\tSad\t0\tv.csv\t-", "", "v1\tSad\t1\tv.csv\t-"])
        assert parse_manifest(path)[0].true_length == 2

    @pytest.mark.parametrize(
        "second_line, message",
        [
            ("v1\tBored\t1\tv.csv\t-", "unknown label word"),
            ("v1\tSad\tone\tv.csv\t-", "not an integer"),
            ("v1\tSad\t0\tv.csv\t-", "duplicate frame"),
            ("v1\tSad\t1\tmissing.csv\t-", "unreadable feature file"),
            ("v1\tHappy\t1\tv.csv\t-", "changes label"),
            ("v1\tSad\t1\tv.csv\tmissing.csv", "unreadable feature file"),
        ],
    )
    def test_errors_carry_line_numbers(self, feature_dir, second_line, message):
        path = write_lines(feature_dir / "m.tsv", ["v1\tSad\t0\tv.csv\t-", second_line])
        with pytest.raises(ManifestError, match=f"line 2: .*{message}") as info:
            parse_manifest(path)
        assert info.value.line_number == 2

    def test_decreasing_frame_index(self, feature_dir):
        path = write_lines(feature_dir / "m.tsv", ["v1\tSad\t5\tv.csv\t-", "v1\tSad\t4\tv.csv\t-"])
        with pytest.raises(ManifestError, match="must increase"):
            parse_manifest(path)

    def test_wrong_column_count(self, feature_dir):
        path = write_lines(feature_dir / "m.tsv", ["v1\tSad\t0\tv.csv"])
        with pytest.raises(ManifestError, match="5 tab-separated columns"):
            parse_manifest(path)

    def test_paths_are_not_checked_on_request(self, tmp_path):
        path = write_lines(tmp_path / "m.tsv", ["v1\tSad\t0\tnowhere.csv\t-"])
        assert parse_manifest(path, check_paths=False)[0].video_id == "v1"

    def test_invalid_utf8_carries_line_number(self, feature_dir):
        path = feature_dir / "m.tsv"
        path.write_bytes(b"v1\tSad\t0\tv.csv\t-\nv\xff1\tSad\t1\tv.csv\t-\n")
        with pytest.raises(ManifestError, match="line 2: .*not valid UTF-8") as info:
            parse_manifest(path)
        assert info.value.line_number == 2

    def test_invalid_utf8_feature_file(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_bytes(b"0,1.0\n1,\xff\n")
        with pytest.raises(FeatureFileError, match="line 2: not valid UTF-8"):
            read_feature_file(path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError):
            parse_manifest(tmp_path / "absent.tsv")


class TestFeatureFiles:
    @pytest.mark.parametrize("dim, rows", [(AUDIO_LLD_DIM, 5), (AUDIO_FUNCTIONAL_DIM, 1)])
    def test_round_trip_is_byte_exact(self, tmp_path, dim, rows):
        rng = np.random.default_rng(dim)
        values = rng.normal(size=(rows, dim))
        first = write_feature_file(tmp_path / "a.csv", np.arange(rows) * 2, values)
        indices, loaded = read_feature_file(first)
        np.testing.assert_array_equal(indices, np.arange(rows) * 2)
        np.testing.assert_array_equal(loaded, values)
        second = write_feature_file(tmp_path / "b.csv", indices, loaded)
        assert first.read_bytes() == second.read_bytes()

    def test_header_is_skipped(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("frame,v1,v2\n3,0.5,1.5\n4,2.5,3.5\n", encoding="utf-8")
        indices, values = read_feature_file(path)
        np.testing.assert_array_equal(indices, [3, 4])
        np.testing.assert_array_equal(values, [[0.5, 1.5], [2.5, 3.5]])

    @pytest.mark.parametrize(
        "text",
        ["", "frame,v1\n", "0\n1\n", "0,abc\n", "0,1.0\n0,2.0\n", "0,nan\n"],
    )
    def test_malformed_files(self, tmp_path, text):
        path = tmp_path / "f.csv"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(FeatureFileError):
            read_feature_file(path)

    def test_store_enforces_one_dimension_per_modality(self, tmp_path):
        write_feature_file(tmp_path / "a.csv", [0, 1], np.ones((2, 3)))
        write_feature_file(tmp_path / "b.csv", [0], np.ones((1, 4)))
        store = FeatureStore(tmp_path)
        a = VideoSequence(
            video_id="a", label=0,
            frames=[FrameRecord(video_id="a", frame_index=i, visual_path="a.csv", label=0) for i in (0, 1)],
        )
        b = VideoSequence(
            video_id="b", label=0,
            frames=[FrameRecord(video_id="b", frame_index=0, visual_path="b.csv", label=0)],
        )
        assert store.frames(a, "visual").shape == (2, 3)
        assert store.dims["visual"] == 3
        with pytest.raises(FeatureFileError, match="expected 3"):
            store.frames(b, "visual")

    def test_store_rows_follow_frame_indices(self, tmp_path):
        values = np.arange(12.0).reshape(4, 3)
        write_feature_file(tmp_path / "s.csv", [0, 2, 4, 6], values)
        seq = VideoSequence(
            video_id="s", label=1,
            frames=[FrameRecord(video_id="s", frame_index=i, visual_path="s.csv", label=1) for i in (2, 6)],
        )
        np.testing.assert_array_equal(FeatureStore(tmp_path).frames(seq, "visual"), values[[1, 3]])

    def test_functional_needs_single_row(self, tmp_path):
        write_feature_file(tmp_path / "f.csv", [0, 1], np.ones((2, 5)))
        seq = VideoSequence(
            video_id="f", label=0,
            frames=[FrameRecord(video_id="f", frame_index=0, visual_path="x.csv", audio_path="f.csv", label=0)],
        )
        with pytest.raises(FeatureFileError, match="single row"):
            FeatureStore(tmp_path).functional(seq)


class TestAlign:
    def test_clip_grid(self):
        assert clip_slot_count(4.0) == 100
        assert clip_slot_count(0.0) == 0
        with pytest.raises(AlignmentError):
            clip_slot_count(-1.0)

    def test_clips_of_dropped_frames_are_discarded(self):
        seq = make_sequence("v", 3, step=2)
        clips = {i: f"clips/v_{i}.csv" for i in range(6)}
        aligned = align_modalities(seq.frames, clips)
        assert [f.audio_path for f in aligned] == ["clips/v_0.csv", "clips/v_2.csv", "clips/v_4.csv"]
        assert [f.frame_index for f in aligned] == [0, 2, 4]

    def test_missing_clip(self):
        seq = make_sequence("v", 3)
        with pytest.raises(AlignmentError, match=r"\[2\]"):
            align_modalities(seq.frames, {0: "a", 1: "b"})

    def test_dataset_alignment(self, tmp_path):
        table = write_lines(
            tmp_path / "clips.tsv",
            ["v\t0\tc0.csv", "v\t1\tc1.csv", "v\t2\tc2.csv", "gone\t0\tg0.csv"],
        )
        clips = read_clip_table(table)
        assert clips["v"] == {0: "c0.csv", 1: "c1.csv", 2: "c2.csv"}
        (aligned,) = align_dataset([make_sequence("v", 2)], clips)
        assert aligned.has_audio
        with pytest.raises(AlignmentError):
            align_dataset([make_sequence("other", 2)], clips)

    def test_clip_table_errors(self, tmp_path):
        with pytest.raises(AlignmentError):
            read_clip_table(write_lines(tmp_path / "a.tsv", ["v\tx\tc.csv"]))
        with pytest.raises(AlignmentError):
            read_clip_table(write_lines(tmp_path / "b.tsv", ["v\t0\tc.csv", "v\t0\td.csv"]))


class TestBlocks:
    @pytest.mark.parametrize("length", [1, 2, 3, 7, 39, 40, 41, 79, 80, 81, 100, 199, 200, 201, 333, 500])
    def test_unpadded_prefixes_reconstruct_the_video(self, length):
        seq = make_sequence("v", length)
        for L in range(1, 201):
            blocks = block_sequences(seq, L)
            assert len(blocks) == -(-length // L)
            rebuilt = [f for b in blocks for f in b.frames[:b.true_length]]
            assert rebuilt == list(seq.frames)
            for b in blocks:
                assert b.length == L
                assert all(f == b.frames[b.true_length - 1] for f in b.frames[b.true_length:])
                np.testing.assert_array_equal(b.mask, np.arange(L) < b.true_length)

    def test_worked_examples(self):
        assert [b.true_length for b in block_sequences(make_sequence("v", 100), 80)] == [80, 20]
        blocks = block_sequences(make_sequence("v", 5), 2)
        assert [b.true_length for b in blocks] == [2, 2, 1]
        assert [b.block_index for b in blocks] == [0, 1, 2]

    def test_features_are_padded_with_last_row(self):
        seq = make_sequence("v", 5)
        visual = np.arange(10.0).reshape(5, 2)
        blocks = block_sequences(seq, 3, visual=visual)
        np.testing.assert_array_equal(blocks[1].visual, [[6.0, 7.0], [8.0, 9.0], [8.0, 9.0]])
        assert blocks[0].audio is None

    def test_feature_rows_must_match_frames(self):
        with pytest.raises(ShapeError):
            block_sequences(make_sequence("v", 5), 3, visual=np.zeros((4, 2)))
        with pytest.raises(ContractError):
            block_sequences(make_sequence("v", 5), 0)

    def test_vector_block(self):
        block = vector_block(make_sequence("v", 4, label=2), np.arange(6.0))
        assert block.audio.shape == (1, 6)
        assert (block.true_length, block.label, block.length) == (1, 2, 1)


class TestStats:
    def test_counts_and_histogram(self):
        sequences = [make_sequence("a", 3, 0), make_sequence("b", 5, 3), make_sequence("c", 12, 3)]
        stats = dataset_stats(sequences, bucket_width=5)
        assert stats.class_counts == {
            "Angry": 1, "Disgust": 0, "Fear": 0, "Happy": 2, "Neutral": 0, "Sad": 0, "Surprise": 0,
        }
        assert stats.length_histogram == {0: 1, 5: 1, 10: 1}
        assert (stats.total_videos, stats.total_frames) == (3, 20)

    def test_counts_sum_to_videos(self):
        rng = np.random.default_rng(0)
        sequences = [make_sequence(f"v{i}", int(rng.integers(1, 30)), int(rng.integers(0, 7))) for i in range(40)]
        stats = dataset_stats(sequences)
        assert sum(stats.class_counts.values()) == 40
        assert sum(stats.length_histogram.values()) == 40

    def test_empty_dataset(self):
        stats = dataset_stats([])
        assert stats.total_videos == 0
        assert stats.length_histogram == {}

    def test_format(self):
        text = format_stats(dataset_stats([make_sequence("a", 3, 4)]))
        lines = text.splitlines()
        assert lines[0] == "class\tvideos"
        assert "Neutral\t1" in lines
        assert "total\t1" in lines
        assert lines[-1] == "3\t1"

    def test_bucket_width_must_be_positive(self):
        with pytest.raises(ContractError):
            dataset_stats([], bucket_width=0)


class TestBatching:
    def blocks(self, count=10, L=4, dim=3):
        rng = np.random.default_rng(0)
        out = []
        for i in range(count):
            length = 1 + i % L
            out.extend(block_sequences(make_sequence(f"v{i}", length, i % 7), L, visual=rng.normal(size=(length, dim))))
        return out

    def test_collate(self):
        batch = collate(self.blocks(3))
        assert batch.visual.shape == (3, 4, 3)
        assert batch.audio is None
        np.testing.assert_array_equal(batch.lengths, [1, 2, 3])
        np.testing.assert_array_equal(batch.mask.sum(axis=1), [1, 2, 3])
        assert batch.size == 3

    def test_sizes_and_order(self):
        blocks = self.blocks(10)
        batches = list(batch_iterator(blocks, 4))
        assert [b.size for b in batches] == [4, 4, 2]
        assert [v for b in batches for v in b.video_ids] == [b.video_id for b in blocks]

    def test_shuffle_is_seeded(self):
        blocks = self.blocks(10)
        order = lambda seed: [v for b in batch_iterator(blocks, 3, shuffle=True, seed=seed) for v in b.video_ids]
        assert order(1) == order(1)
        assert order(1) != order(2)
        assert sorted(order(1)) == sorted(b.video_id for b in blocks)

    def test_errors(self):
        blocks = self.blocks(2)
        with pytest.raises(ContractError):
            list(batch_iterator(blocks, 0))
        mixed = blocks + block_sequences(make_sequence("w", 2), 4, visual=np.zeros((2, 5)))
        with pytest.raises(ShapeError):
            list(batch_iterator(mixed, 2))
