#pragma once

#include "rqbc/adversary.hpp"
#include "rqbc/analysis.hpp"
#include "rqbc/channels.hpp"
#include "rqbc/csv.hpp"
#include "rqbc/errors.hpp"
#include "rqbc/protocol.hpp"
#include "rqbc/qubits.hpp"
#include "rqbc/random.hpp"
#include "rqbc/sched.hpp"
#include "rqbc/spacetime.hpp"
#include "rqbc/transcript_io.hpp"
