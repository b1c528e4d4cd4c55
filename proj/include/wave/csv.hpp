#ifndef WAVE_CSV_HPP
#define WAVE_CSV_HPP

#include "wave/potential.hpp"
#include "wave/profile.hpp"

#include <string>
#include <vector>

namespace wave {

/// Shortest form that survives a decimal round trip (%.17g).
std::string format_double(double v);

/// Header `x,u1,...,un,W,du_norm`, one row per node.
std::string profile_csv(const PotentialSpec<double>& spec, const Profile<double>& p);
void write_profile_csv(const std::string& path, const PotentialSpec<double>& spec, const Profile<double>& p);

/// Parses a profile CSV for a `dim`-component potential. The W and du_norm
/// columns are checked for presence only. Values are taken as written: the
/// last row is not forced to b.
Profile<double> parse_profile_csv(const std::string& text, int dim, const Point<double>& well_b,
                                  const std::string& source = "<csv>");
Profile<double> read_profile_csv(const std::string& path, int dim, const Point<double>& well_b);

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace wave

#endif  // WAVE_CSV_HPP
