#pragma once

#include <iosfwd>
#include <string>

#include "byhe/synth.hpp"
#include "byhe/traintoy.hpp"

namespace byhe {

/// Config readers start from the defaults and override the keys present.
/// Unknown keys and mistyped values raise InputError.
TrainConfig read_train_config(std::istream& in);
TrainConfig load_train_config(const std::string& path);
void write_train_config(const TrainConfig& cfg, std::ostream& out);

SynthSpec read_synth_spec(std::istream& in);
void write_synth_spec(const SynthSpec& spec, std::ostream& out);

/// Non-finite numbers are written as null.
void write_train_report(const TrainReport& r, std::ostream& out);
void write_grad_check_report(const GradCheckReport& r, std::ostream& out);

}  // namespace byhe
