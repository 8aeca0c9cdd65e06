#pragma once

#include "spingw/config.hpp"
#include "spingw/control.hpp"
#include "spingw/display.hpp"
#include "spingw/errors.hpp"
#include "spingw/gateway.hpp"
#include "spingw/lif.hpp"
#include "spingw/link.hpp"
#include "spingw/loop.hpp"
#include "spingw/network.hpp"
#include "spingw/packet.hpp"
#include "spingw/rate.hpp"
#include "spingw/routing.hpp"
