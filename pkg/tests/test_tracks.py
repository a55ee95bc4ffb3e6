import gzip
import math

import pytest

from aebresim.errors import (
    DuplicateFrame,
    EmptyRecording,
    FrameGap,
    MalformedRow,
    TrackTooShort,
)
from aebresim.tracks import (
    ColumnAdapters,
    ParticipantClass,
    ParticipantMeta,
    Recording,
    Track,
    TrackSample,
    load_recording,
    parse_recording,
    serialize_recording,
    validate_recording,
)

TRACKS_HEADER = ("recordingId,trackId,frame,x,y,heading,xVelocity,yVelocity,"
                 "xAcceleration,yAcceleration\n")
META = b"trackId,class,width,length\n7,car,1.8,4.5\n"
RECMETA = b"recordingId,frameRate\nrec01,25\n"


def tracks_csv(rows: list[str], header: str = TRACKS_HEADER) -> bytes:
    return (header + "\n".join(rows) + "\n").encode()


def minimal_tracks() -> bytes:
    return tracks_csv([
        "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
        "rec01,7,1,0.4,0.0,0.0,10.0,0.0,0.0,0.0",
    ])


class TestParse:
    def test_minimal_two_rows(self):
        rec = parse_recording(minimal_tracks(), META, RECMETA)
        assert rec.recording_id == "rec01"
        assert rec.fps == 25
        assert rec.has_heading is True
        assert list(rec.tracks) == [7]
        track = rec.tracks[7]
        assert track.meta.cls is ParticipantClass.CAR
        assert len(track.samples) == 2
        assert track.samples[1].t == pytest.approx(1 / 25)

    def test_heading_column_optional(self):
        header = TRACKS_HEADER.replace("heading,", "")
        body = tracks_csv([
            "rec01,7,0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,1,0.4,0.0,10.0,0.0,0.0,0.0",
        ], header)
        rec = parse_recording(body, META, RECMETA)
        assert rec.has_heading is False
        assert rec.tracks[7].samples[0].heading is None

    def test_non_numeric_field_located(self):
        bad = tracks_csv([
            "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,1,abc,0.0,0.0,10.0,0.0,0.0,0.0",
        ])
        with pytest.raises(MalformedRow) as err:
            parse_recording(bad, META, RECMETA)
        assert err.value.row == 3
        assert err.value.column == "x"

    def test_non_finite_rejected(self):
        bad = tracks_csv([
            "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,1,nan,0.0,0.0,10.0,0.0,0.0,0.0",
        ])
        with pytest.raises(MalformedRow):
            parse_recording(bad, META, RECMETA)

    def test_duplicate_frame(self):
        bad = tracks_csv([
            "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,0,0.4,0.0,0.0,10.0,0.0,0.0,0.0",
        ])
        with pytest.raises(DuplicateFrame):
            parse_recording(bad, META, RECMETA)

    def test_frame_gap_rejected(self):
        bad = tracks_csv([
            "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,2,0.8,0.0,0.0,10.0,0.0,0.0,0.0",
        ])
        with pytest.raises(FrameGap):
            parse_recording(bad, META, RECMETA)

    def test_empty_recording(self):
        with pytest.raises(EmptyRecording):
            parse_recording(TRACKS_HEADER.encode(), META, RECMETA)

    def test_single_sample_track_rejected(self):
        bad = tracks_csv(["rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0"])
        with pytest.raises(TrackTooShort):
            parse_recording(bad, META, RECMETA)

    def test_unknown_class_rejected(self):
        meta = b"trackId,class,width,length\n7,tank,1.8,4.5\n"
        with pytest.raises(MalformedRow):
            parse_recording(minimal_tracks(), meta, RECMETA)

    def test_degree_adapter_converts(self):
        rows = tracks_csv([
            "rec01,7,0,0.0,0.0,90.0,0.0,10.0,0.0,0.0",
            "rec01,7,1,0.0,0.4,90.0,0.0,10.0,0.0,0.0",
        ])
        rec = parse_recording(rows, META, RECMETA,
                              ColumnAdapters(heading_unit="deg"))
        assert rec.tracks[7].samples[0].heading == pytest.approx(math.pi / 2)

    def test_column_rename_adapter(self):
        header = TRACKS_HEADER.replace("trackId", "id")
        rows = tracks_csv([
            "rec01,7,0,0.0,0.0,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,1,0.4,0.0,0.0,10.0,0.0,0.0,0.0",
        ], header)
        rec = parse_recording(rows, META, RECMETA,
                              ColumnAdapters(tracks={"trackId": "id"}))
        assert list(rec.tracks) == [7]

    def test_deterministic(self):
        a = parse_recording(minimal_tracks(), META, RECMETA)
        b = parse_recording(minimal_tracks(), META, RECMETA)
        assert a == b

    def test_no_rows_dropped(self):
        rows = [f"rec01,7,{k},{0.4 * k},0.0,0.0,10.0,0.0,0.0,0.0" for k in range(50)]
        rows += [f"rec01,8,{k},{-0.4 * k},5.0,3.14,-10.0,0.0,0.0,0.0" for k in range(30)]
        meta = b"trackId,class,width,length\n7,car,1.8,4.5\n8,van,2.0,5.0\n"
        rec = parse_recording(tracks_csv(rows), meta, RECMETA)
        assert sum(len(t.samples) for t in rec.tracks.values()) == len(rows)


class TestRoundTrip:
    def _sample_recording(self) -> Recording:
        rows = [f"rec01,7,{k},{0.41 * k},{0.013 * k * k},{0.1 * k},10.5,0.2,-0.4,0.01"
                for k in range(10)]
        meta = b"trackId,class,width,length\n7,car,1.8,4.5\n"
        return parse_recording(tracks_csv(rows), meta, RECMETA)

    def test_round_trip_equality(self):
        rec = self._sample_recording()
        tracks_b, meta_b, recmeta_b = serialize_recording(rec)
        again = parse_recording(tracks_b, meta_b, recmeta_b)
        assert again == rec

    def test_round_trip_without_heading(self):
        header = TRACKS_HEADER.replace("heading,", "")
        rows = tracks_csv([
            "rec01,7,0,0.125,0.0,10.0,0.0,0.0,0.0",
            "rec01,7,1,0.525,0.0,10.0,0.0,0.0,0.0",
        ], header)
        rec = parse_recording(rows, META, RECMETA)
        again = parse_recording(*serialize_recording(rec))
        assert again == rec
        assert again.has_heading is False

    def test_vru_missing_dims_round_trip(self):
        meta = b"trackId,class,width,length\n7,pedestrian,,\n"
        rec = parse_recording(minimal_tracks(), meta, RECMETA)
        assert rec.tracks[7].meta.width is None
        again = parse_recording(*serialize_recording(rec))
        assert again == rec


class TestGzip:
    def test_load_recording_gz(self, tmp_path):
        files = {
            "r_tracks.csv.gz": minimal_tracks(),
            "r_tracksMeta.csv.gz": META,
            "r_recordingMeta.csv.gz": RECMETA,
        }
        for name, data in files.items():
            (tmp_path / name).write_bytes(gzip.compress(data))
        rec = load_recording(tmp_path / "r_tracks.csv.gz",
                             tmp_path / "r_tracksMeta.csv.gz",
                             tmp_path / "r_recordingMeta.csv.gz")
        assert len(rec.tracks[7].samples) == 2


def _hand_built(samples_frames, cls=ParticipantClass.CAR, width=1.8, length=4.5):
    samples = [TrackSample(frame=f, t=f / 25, x=0.4 * f, y=0.0,
                           vx=10.0, vy=0.0, ax=0.0, ay=0.0, heading=0.0)
               for f in samples_frames]
    meta = ParticipantMeta(track_id=1, cls=cls, width=width, length=length)
    return Recording(recording_id="r", fps=25.0, has_heading=True,
                     tracks={1: Track(meta=meta, samples=samples)})


class TestValidation:
    def test_clean_track(self):
        report = validate_recording(_hand_built(range(10)))
        assert report.ok

    def test_frame_gap_issue(self):
        report = validate_recording(_hand_built([1, 2, 4]))
        kinds = [i.kind for i in report.issues]
        assert "frame_gap" in kinds

    def test_missing_dimension_issue(self):
        report = validate_recording(_hand_built(range(5), width=None, length=None))
        assert report.by_kind("missing_dimension")

    def test_vru_missing_dims_ok(self):
        report = validate_recording(
            _hand_built(range(5), cls=ParticipantClass.PEDESTRIAN, width=None, length=None))
        assert not report.by_kind("missing_dimension")

    def test_speed_discontinuity(self):
        samples = [TrackSample(frame=f, t=f / 25, x=0.0, y=0.0,
                               vx=(0.0 if f < 3 else 30.0), vy=0.0, ax=0.0, ay=0.0,
                               heading=0.0)
                   for f in range(6)]
        meta = ParticipantMeta(track_id=1, cls=ParticipantClass.CAR, width=1.8, length=4.5)
        rec = Recording(recording_id="r", fps=25.0, has_heading=True,
                        tracks={1: Track(meta=meta, samples=samples)})
        report = validate_recording(rec, jerk_bound=50.0)
        assert report.by_kind("speed_discontinuity")
