#pragma once

#include <stdexcept>
#include <string>

namespace fuelred {

// Base for every error raised by the library. Each subclass carries the
// error name so the CLI can report it without RTTI tricks.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define FUELRED_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message) : Error(#Name, message) {}   \
    }

// configuration / IO
FUELRED_DEFINE_ERROR(ConfigError);
FUELRED_DEFINE_ERROR(IoError);
FUELRED_DEFINE_ERROR(MissingPrerequisite);

// drive cycles
FUELRED_DEFINE_ERROR(ParseError);
FUELRED_DEFINE_ERROR(UnitError);
FUELRED_DEFINE_ERROR(MonotonicityError);
FUELRED_DEFINE_ERROR(InvalidDt);

// reference powertrain
FUELRED_DEFINE_ERROR(GearOutOfRange);

// extraction and fitting
FUELRED_DEFINE_ERROR(NoIdleData);
FUELRED_DEFINE_ERROR(NoFuelCutData);
FUELRED_DEFINE_ERROR(NoDownshiftData);
FUELRED_DEFINE_ERROR(NoFirstGearData);
FUELRED_DEFINE_ERROR(RankDeficient);
FUELRED_DEFINE_ERROR(DegreeTooHigh);
FUELRED_DEFINE_ERROR(ConstraintInfeasible);

// dyno ingestion
FUELRED_DEFINE_ERROR(InsufficientData);
FUELRED_DEFINE_ERROR(NonPositiveSlope);
FUELRED_DEFINE_ERROR(SeriesTooShort);
FUELRED_DEFINE_ERROR(NeverHot);
FUELRED_DEFINE_ERROR(SmoothingDiverged);

// validation
FUELRED_DEFINE_ERROR(NoOverlap);
FUELRED_DEFINE_ERROR(LengthMismatch);
FUELRED_DEFINE_ERROR(ZeroReference);

#undef FUELRED_DEFINE_ERROR

class InsufficientGearData : public Error {
public:
    InsufficientGearData(int gear, std::size_t samples, std::size_t required)
        : Error("InsufficientGearData",
                "gear " + std::to_string(gear) + " has " + std::to_string(samples) +
                    " usable samples, need " + std::to_string(required)),
          gear_(gear) {}

    [[nodiscard]] int gear() const noexcept { return gear_; }

private:
    int gear_;
};

}  // namespace fuelred
