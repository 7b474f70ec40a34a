#include "motifrep/core/midi.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <string>
#include <utility>

namespace motifrep {
namespace {

class ByteReader {
 public:
  ByteReader(std::span<const uint8_t> bytes, std::size_t pos, std::size_t end)
      : bytes_(bytes), pos_(pos), end_(end) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= end_; }

  uint8_t u8() {
    if (pos_ >= end_) throw ParseError("unexpected end of data", pos_);
    return bytes_[pos_++];
  }
  uint8_t peek() const {
    if (pos_ >= end_) throw ParseError("unexpected end of data", pos_);
    return bytes_[pos_];
  }
  uint32_t be(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | u8();
    return v;
  }
  uint32_t vlq() {
    const std::size_t start = pos_;
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", start);
  }
  void skip(std::size_t n) {
    if (end_ - pos_ < n) throw ParseError("truncated event payload", pos_);
    pos_ += n;
  }

 private:
  std::span<const uint8_t> bytes_;
  std::size_t pos_;
  std::size_t end_;
};

struct OpenNote {
  int64_t onset;
  int velocity;
};

void parse_track(std::span<const uint8_t> bytes, std::size_t begin, std::size_t end, int track_index,
                 NoteSequence& seq, Diagnostics* diag) {
  ByteReader r(bytes, begin, end);
  std::map<std::pair<int, int>, std::deque<OpenNote>> open;
  int64_t tick = 0;
  uint8_t running = 0;
  bool ended = false;

  auto close_note = [&](int channel, int key, int64_t at) {
    auto it = open.find({channel, key});
    if (it == open.end() || it->second.empty()) return;
    OpenNote on = it->second.front();
    it->second.pop_front();
    seq.notes.push_back(Note{key, on.onset, std::max<int64_t>(1, at - on.onset), on.velocity});
  };

  while (!r.at_end() && !ended) {
    tick += r.vlq();
    const std::size_t event_pos = r.pos();
    uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
      if (status < 0xF0) running = status;
    } else {
      if (running == 0) throw ParseError("data byte without running status", event_pos);
      status = running;
    }

    if (status == 0xFF) {
      const uint8_t type = r.u8();
      const uint32_t len = r.vlq();
      const std::size_t payload = r.pos();
      if (type == 0x51) {
        if (len != 3) throw ParseError("tempo event with length " + std::to_string(len), payload);
        const uint32_t usec = r.be(3);
        if (usec == 0) throw ParseError("zero tempo", payload);
        seq.tempo_events.push_back(TempoEvent{tick, 60'000'000.0 / usec});
      } else if (type == 0x58) {
        if (len < 2) throw ParseError("short time-signature event", payload);
        const int num = r.u8();
        const int den_pow = r.u8();
        r.skip(len - 2);
        const int den = den_pow < 8 ? (1 << den_pow) : -1;
        if (num != 4 || den != 4) throw UnsupportedMeterError(num, den);
      } else if (type == 0x2F) {
        r.skip(len);
        ended = true;
      } else {
        r.skip(len);
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      r.skip(r.vlq());
      continue;
    }
    if (status >= 0xF0) throw ParseError("unexpected system message in track", event_pos);

    const int kind = status & 0xF0;
    const int channel = status & 0x0F;
    switch (kind) {
      case 0x80: {
        const int key = r.u8() & 0x7F;
        r.u8();
        close_note(channel, key, tick);
        break;
      }
      case 0x90: {
        const int key = r.u8() & 0x7F;
        const int vel = r.u8() & 0x7F;
        if (vel == 0) {
          close_note(channel, key, tick);
        } else {
          open[{channel, key}].push_back(OpenNote{tick, vel});
        }
        break;
      }
      case 0xA0:
      case 0xB0:
      case 0xE0:
        r.skip(2);
        break;
      case 0xC0:
      case 0xD0:
        r.skip(1);
        break;
      default:
        throw ParseError("unknown status byte", event_pos);
    }
  }

  for (auto& [key, notes] : open) {
    while (!notes.empty()) {
      const OpenNote on = notes.front();
      if (diag) {
        diag->warn("track " + std::to_string(track_index) + ": note " + std::to_string(key.second) +
                   " on channel " + std::to_string(key.first) + " at tick " + std::to_string(on.onset) +
                   " has no note-off; terminated at end of track (tick " + std::to_string(tick) + ")");
      }
      close_note(key.first, key.second, tick);
    }
  }
}

void put_vlq(std::vector<uint8_t>& out, uint32_t v) {
  uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<uint8_t>((v & 0x7F) | 0x80);
  while (n--) out.push_back(buf[n]);
}

void put_be(std::vector<uint8_t>& out, uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

NoteSequence parse_midi(std::span<const uint8_t> bytes, Diagnostics* diag) {
  ByteReader header(bytes, 0, bytes.size());
  if (bytes.size() < 14 || !std::equal(bytes.begin(), bytes.begin() + 4, "MThd")) {
    throw ParseError("missing MThd header", 0);
  }
  header.skip(4);
  const uint32_t header_len = header.be(4);
  if (header_len < 6) throw ParseError("MThd chunk shorter than 6 bytes", 4);
  const int format = static_cast<int>(header.be(2));
  const int ntracks = static_cast<int>(header.be(2));
  const std::size_t division_pos = header.pos();
  const uint32_t division = header.be(2);
  if (format != 0 && format != 1) throw ParseError("unsupported SMF format " + std::to_string(format), 8);
  if (division & 0x8000) throw ParseError("SMPTE time division is not supported", division_pos);
  if (division == 0) throw ParseError("zero ticks per quarter", division_pos);

  NoteSequence seq;
  seq.ticks_per_quarter = static_cast<int>(division);

  std::size_t pos = 8 + header_len;
  int track = 0;
  while (track < ntracks) {
    if (pos + 8 > bytes.size()) throw ParseError("truncated track header", pos);
    const bool is_track = std::equal(bytes.begin() + pos, bytes.begin() + pos + 4, "MTrk");
    ByteReader chunk(bytes, pos + 4, bytes.size());
    const uint32_t len = chunk.be(4);
    const std::size_t body = pos + 8;
    if (bytes.size() - body < len) throw ParseError("truncated track", body);
    if (is_track) {
      parse_track(bytes, body, body + len, track, seq, diag);
      ++track;
    }
    pos = body + len;
  }
  seq.sort();
  return seq;
}

NoteSequence read_midi_file(const std::filesystem::path& path, Diagnostics* diag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_midi(bytes, diag);
}

std::vector<uint8_t> write_midi(const NoteSequence& seq) {
  struct Event {
    int64_t tick;
    int order;  // meta first, then note-offs, then note-ons
    std::vector<uint8_t> data;
  };
  std::vector<Event> events;
  events.push_back({0, 0, {0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08}});
  std::vector<TempoEvent> tempos = seq.tempo_events;
  if (tempos.empty()) tempos.push_back(TempoEvent{0, kDefaultBpm});
  for (const auto& t : tempos) {
    const auto usec = static_cast<uint32_t>(std::lround(60'000'000.0 / t.bpm));
    events.push_back({t.tick, 0,
                      {0xFF, 0x51, 0x03, static_cast<uint8_t>(usec >> 16), static_cast<uint8_t>(usec >> 8),
                       static_cast<uint8_t>(usec)}});
  }
  for (const auto& n : seq.notes) {
    const auto key = static_cast<uint8_t>(n.pitch);
    events.push_back({n.onset, 2, {0x90, key, static_cast<uint8_t>(n.velocity)}});
    events.push_back({n.end(), 1, {0x80, key, 0x40}});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
  });

  std::vector<uint8_t> track;
  int64_t last = 0;
  for (const auto& ev : events) {
    put_vlq(track, static_cast<uint32_t>(ev.tick - last));
    last = ev.tick;
    track.insert(track.end(), ev.data.begin(), ev.data.end());
  }
  put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<uint8_t> out{'M', 'T', 'h', 'd'};
  put_be(out, 6, 4);
  put_be(out, 0, 2);
  put_be(out, 1, 2);
  put_be(out, static_cast<uint32_t>(seq.ticks_per_quarter), 2);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_be(out, static_cast<uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

void write_midi_file(const NoteSequence& seq, const std::filesystem::path& path) {
  const auto bytes = write_midi(seq);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace motifrep
