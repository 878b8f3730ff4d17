// SPDX-License-Identifier: Apache-2.0
//
// uwbchan - processing and statistical modelling of double-directional channel measurements
// Copyright (C) 2026 The uwbchan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef UWBCHAN_DIRECTIONAL_HPP
#define UWBCHAN_DIRECTIONAL_HPP

#include "pdp.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace uwbchan
{

// Gated directional profiles of one link and band, stored in flat beam order
// (tx_az major, co-elevation minor).
struct DirectionalPdpSet
{
    AngularGrid angles;
    SubBand band;
    std::vector<PowerDelayProfile> pdps;

    const PowerDelayProfile &at(BeamIndex b) const { return pdps.at(angles.flat_index(b)); }

    void validate() const
    {
        if (pdps.empty())
            throw ValidationError("directional set is empty");
        if (pdps.size() != angles.n_beams())
            throw ValidationError("directional set holds " + std::to_string(pdps.size()) + " profiles for " +
                                  std::to_string(angles.n_beams()) + " beams");
        for (const auto &p : pdps)
            if (p.size() != pdps.front().size() || p.delay_step_s != pdps.front().delay_step_s)
                throw ValidationError("directional set profiles do not share one delay grid");
    }
};

struct OmniPdp
{
    PowerDelayProfile pdp;
    double correction_db = 0.0;
    SubBand band;
};

struct MaxDirSelection
{
    BeamIndex beam;
    double total_power = 0.0;
};

// Streaming form of the Max-Dir and omni constructions. Profiles are fed one
// azimuth pair (all co-elevations) at a time, in any pair order; the running
// state is the per-bin maximum of elevation sums, the best beam so far, and
// every beam's kept total.
class DirectionalAccumulator
{
public:
    DirectionalAccumulator(AngularGrid angles, SubBand band)
        : angles_(std::move(angles)), band_(std::move(band)), beam_totals_(angles_.n_beams(), 0.0)
    {
    }

    // Returns the co-elevation index if this pair now holds the strongest beam.
    std::optional<std::size_t> add_pair(std::size_t tx, std::size_t rx, std::span<const PowerDelayProfile> coel_pdps)
    {
        if (coel_pdps.size() != angles_.n_coel())
            throw ValidationError("add_pair: expected one profile per co-elevation");
        if (!omni_)
        {
            omni_.emplace();
            omni_->delay_step_s = coel_pdps.front().delay_step_s;
            omni_->powers.assign(coel_pdps.front().size(), 0.0);
            omni_->kept_mask.assign(coel_pdps.front().size(), false);
            omni_->band = band_;
            omni_->gated = true;
            pair_sum_.resize(coel_pdps.front().size());
        }
        const std::size_t n = omni_->size();
        std::fill(pair_sum_.begin(), pair_sum_.end(), 0.0);

        std::optional<std::size_t> new_best;
        for (std::size_t k = 0; k < coel_pdps.size(); ++k)
        {
            const auto &p = coel_pdps[k];
            if (p.size() != n || p.delay_step_s != omni_->delay_step_s)
                throw ValidationError("add_pair: profiles do not share one delay grid");
            for (std::size_t i = 0; i < n; ++i)
                if (p.kept_mask[i])
                {
                    pair_sum_[i] += p.powers[i];
                    omni_->kept_mask[i] = true;
                }

            const BeamIndex b{tx, rx, k};
            const double total = p.kept_total();
            beam_totals_[angles_.flat_index(b)] = total;
            // strict comparison plus the lexicographic tie rule; pairs may arrive out of order
            if (!best_ || total > best_->total_power || (total == best_->total_power && b < best_->beam))
            {
                best_ = MaxDirSelection{b, total};
                new_best = k;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            omni_->powers[i] = std::max(omni_->powers[i], pair_sum_[i]);
        return new_best;
    }

    // Elevation-summed, azimuth-maximised profile before gain correction.
    const PowerDelayProfile &omni_uncorrected() const
    {
        if (!omni_)
            throw ValidationError("no profiles were accumulated");
        return *omni_;
    }

    OmniPdp omni(double correction_db) const
    {
        OmniPdp out{omni_uncorrected(), correction_db, band_};
        const double factor = std::pow(10.0, -correction_db / 10.0);
        for (auto &p : out.pdp.powers)
            p *= factor;
        return out;
    }

    const std::optional<MaxDirSelection> &best() const { return best_; }
    const std::vector<double> &beam_totals() const { return beam_totals_; }
    const AngularGrid &angles() const { return angles_; }

private:
    AngularGrid angles_;
    SubBand band_;
    std::vector<double> beam_totals_;
    std::vector<double> pair_sum_;
    std::optional<PowerDelayProfile> omni_;
    std::optional<MaxDirSelection> best_;
};

inline DirectionalAccumulator accumulate(const DirectionalPdpSet &set)
{
    set.validate();
    DirectionalAccumulator acc(set.angles, set.band);
    const std::size_t nc = set.angles.n_coel();
    for (std::size_t i = 0; i < set.angles.n_tx(); ++i)
        for (std::size_t j = 0; j < set.angles.n_rx(); ++j)
            acc.add_pair(i, j, std::span<const PowerDelayProfile>(set.pdps).subspan(set.angles.flat_index({i, j, 0}), nc));
    return acc;
}

// Beam pair with the largest kept power; ties go to the lexicographically smallest index.
inline std::pair<BeamIndex, PowerDelayProfile> select_max_dir(const DirectionalPdpSet &set)
{
    const auto acc = accumulate(set);
    const auto &best = acc.best();
    if (!best || !(best->total_power > 0.0))
        throw OutageError("select_max_dir: every beam is empty after gating");
    PowerDelayProfile pdp = set.at(best->beam);
    pdp.beam = best->beam;
    return {best->beam, std::move(pdp)};
}

// Sum over co-elevations, maximum over azimuth pairs per delay bin, then the
// virtual-pattern gain (interpolated at the band centre) is subtracted in dB.
inline OmniPdp build_omni(const DirectionalPdpSet &set, const AntennaElevationGainTable &gains)
{
    const double correction_db = gains.correction_db(set.band.center_hz());
    return accumulate(set).omni(correction_db);
}

} // namespace uwbchan

#endif
