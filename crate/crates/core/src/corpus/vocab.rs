//! Built-in lexicon for the synthetic storefront.

pub(crate) const CATEGORIES: &[(&str, &[&str])] = &[
    ("tools", &["drill", "circular saw", "impact driver", "jigsaw", "orbital sander", "socket wrench"]),
    ("electrical", &["extension cord", "outlet", "light switch", "circuit breaker", "electrical wire", "surge protector"]),
    ("lighting", &["pendant light", "work light", "led bulb", "chandelier", "flashlight", "track lighting"]),
    ("appliances", &["refrigerator", "gas range", "dishwasher", "washing machine", "clothes dryer", "microwave"]),
    ("outdoors", &["lawn mower", "leaf blower", "string trimmer", "pressure washer", "chainsaw", "snow blower"]),
    ("plumbing", &["faucet", "toilet", "water heater", "shower head", "sump pump", "garbage disposal"]),
    ("flooring", &["tiles", "vinyl plank", "carpet", "laminate", "hardwood", "underlayment"]),
    ("paint", &["interior paint", "exterior paint", "primer", "paint roller", "spray paint", "wood stain"]),
    ("hardware", &["door knob", "cabinet hinge", "padlock", "deadbolt", "wall anchor", "wood screws"]),
    ("building materials", &["drywall", "plywood", "concrete mix", "insulation", "rebar", "cement board"]),
    ("kitchen", &["kitchen sink", "range hood", "countertop", "cabinet organizer", "backsplash", "pantry shelf"]),
    ("bath", &["bathroom vanity", "bathtub", "towel bar", "medicine cabinet", "shower door", "bath mat"]),
    ("storage", &["garage shelving", "tool chest", "storage bin", "closet system", "wall rack", "utility cart"]),
    ("doors", &["entry door", "storm door", "patio door", "barn door", "door frame", "garage door"]),
    ("windows", &["double hung window", "skylight", "window screen", "casement window", "window glass", "glass block"]),
    ("heating", &["space heater", "furnace filter", "wall heater", "radiant heater", "pellet stove", "baseboard heater"]),
    ("cooling", &["window ac", "portable ac", "dehumidifier", "attic fan", "evaporative cooler", "mini split"]),
    ("garden", &["potting soil", "mulch", "garden hose", "planter", "fertilizer", "seed starter"]),
    ("decor", &["wall mirror", "wall art", "artificial plant", "picture frame", "throw pillow", "candle holder"]),
    ("furniture", &["bookcase", "office chair", "dining table", "storage bench", "bar stool", "futon"]),
    ("lumber", &["2x4 stud", "cedar board", "treated post", "dowel", "trim molding", "shiplap"]),
    ("roofing", &["roof shingles", "roofing nails", "gutter", "drip edge", "roof vent", "flashing tape"]),
    ("safety", &["smoke detector", "fire extinguisher", "safety glasses", "work gloves", "carbon monoxide alarm", "hard hat"]),
    ("cleaning", &["carpet cleaner", "mop", "vacuum", "broom", "trash can", "shop vac"]),
    ("automotive", &["car battery", "jumper cables", "floor jack", "tire inflator", "motor oil", "wiper blades"]),
    ("pool", &["pool pump", "pool filter", "pool chlorine", "pool ladder", "pool cover", "skimmer net"]),
    ("smart home", &["smart thermostat", "video doorbell", "smart plug", "security camera", "smart lock", "wifi extender"]),
    ("window treatments", &["blinds", "curtains", "curtain rod", "roller shade", "valance", "shutters"]),
    ("rugs", &["area rug", "runner rug", "doormat", "rug pad", "outdoor rug", "bath rug"]),
    ("patio", &["patio set", "umbrella base", "hammock", "fire pit", "porch swing", "adirondack chair"]),
    ("grills", &["gas grill", "charcoal grill", "smoker", "grill cover", "griddle", "pellet grill"]),
    ("holiday", &["christmas tree", "string lights", "wreath", "inflatable", "tree stand", "ornament hook"]),
];

pub(crate) const BRANDS: &[&str] = &[
    "ryobi", "samsung", "dewalt", "milwaukee", "makita", "whirlpool", "lg", "frigidaire", "bosch",
    "kohler", "moen", "delta", "behr", "glidden", "rustoleum", "husky", "ridgid", "ego", "toro",
    "greenworks", "philips", "hampton bay", "leviton", "eaton", "southwire", "lifeproof", "pergo",
    "kwikset", "schlage", "everbilt", "quikrete", "glacier bay", "weber", "char-broil", "rheem",
    "honeywell", "stanley", "craftsman", "cuisinart", "ring",
];

pub(crate) const ATTRIBUTES: &[&str] = &[
    "18 volt", "24 in.", "30 in.", "cordless", "stainless steel", "white", "black", "5.8 cu. ft.",
    "heavy duty", "2 pack", "12 ft.", "energy star", "classic", "brushless", "compact", "1 gal.",
    "36 in.", "pro series",
];

pub(crate) const CITIES: &[&str] = &[
    "atlanta", "dallas", "denver", "phoenix", "seattle", "boston", "chicago", "miami", "austin",
    "portland", "orlando", "houston", "tampa", "memphis", "columbus", "raleigh",
];

/// Fixed brand catalogues that reproduce the storefront examples: a brand-only
/// query like "18 volt ryobi" spans several departments.
pub(crate) const FIXED_SELLERS: &[(&str, &[&str])] = &[
    ("ryobi", &["drill", "extension cord", "work light"]),
    ("samsung", &["refrigerator"]),
];

/// Fixed cross-listings (noun, secondary category).
pub(crate) const FIXED_SECONDARY: &[(&str, &str)] = &[("refrigerator", "electrical")];

/// Service templates for non-commercial queries. `{noun}`, `{brand}`,
/// `{city}` are slots.
pub(crate) const SERVICE_TEMPLATES: &[&str] = &[
    "how to install my {noun}",
    "how to install {noun}",
    "where is my {noun} order",
    "where is my shipped order",
    "cost to rent a {noun}",
    "{noun} rental",
    "{noun} installation",
    "{noun} repair service",
    "store hours {city}",
    "military discount {city}",
    "{brand} military discount",
    "return policy {noun}",
    "track my {noun} delivery",
];

/// Near-boundary non-commercial form; its commercial twin appends
/// [`AMBIGUOUS_SUFFIX`].
pub(crate) const AMBIGUOUS_SERVICE: &[&str] = &["{attr} {noun} installation", "{attr} {noun} repair"];

pub(crate) const AMBIGUOUS_SUFFIX: &str = "kit";
