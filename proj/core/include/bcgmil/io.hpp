#ifndef BCGMIL_IO_HPP_
#define BCGMIL_IO_HPP_

// Text file formats. Every reader throws FormatError on unreadable or
// malformed input; every writer throws FormatError when the file cannot be
// written. Numbers are written in shortest round-trip form so that output
// is reproducible byte for byte.

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcgmil/detector.hpp"
#include "bcgmil/evaluation.hpp"
#include "bcgmil/fumi.hpp"
#include "bcgmil/signal.hpp"
#include "bcgmil/synth.hpp"

namespace bcgmil {

// Header `t,ch0,...,chK[,gt]`; t in seconds on a uniform grid, from which
// the sample rate is recovered. gt is 1 on reference beat samples.
Recording parse_recording_csv(std::istream& in);
Recording read_recording_csv(const std::string& path);
void write_recording_csv(const std::string& path, const Recording& recording);

// Header `kind,s0,...,s{d-1}`; one atom per row, kind target|background.
Dictionary read_dictionary_csv(const std::string& path);
void write_dictionary_csv(const std::string& path, const Dictionary& dict);

// Plain numeric matrix, one row per line, no header.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

// `beat_index,beat_time_s,confidence_sum`
void write_beats_csv(const std::string& path, const std::vector<Beat>& beats,
                     double fs);
// Reads the beat_index column of any CSV whose header starts with it.
std::vector<std::size_t> read_beats_csv(const std::string& path);

// `window_center_s,hr_bpm`; an empty hr field marks a gap.
void write_hr_csv(const std::string& path, const HrSeries& hr);
HrSeries read_hr_csv(const std::string& path);

// `channel,peak_index,confidence`
void write_confidence_csv(const std::string& path, const ConfidenceSeries& series);

// Synth sidecar: the generator's key=value settings followed by
// `template=` and the planted template as one comma-separated row.
void write_synth_sidecar(const std::string& path, const SynthConfig& config,
                         const Eigen::VectorXd& planted_template);
Eigen::VectorXd read_sidecar_template(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace bcgmil

#endif  // BCGMIL_IO_HPP_
