#pragma once

#include "bevscan/auction/auction.hpp"
#include "bevscan/chain/amm.hpp"
#include "bevscan/detect/arbitrage.hpp"
#include "bevscan/detect/clogging.hpp"
#include "bevscan/detect/liquidation.hpp"
#include "bevscan/detect/sandwich.hpp"
#include "bevscan/io/fixture.hpp"
#include "bevscan/io/mempool.hpp"
#include "bevscan/io/trace.hpp"
#include "bevscan/replay/replay.hpp"
#include "bevscan/report/report.hpp"
#include "bevscan/security/fork.hpp"
