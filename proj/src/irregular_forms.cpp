#include "dia/morphology.hpp"

#include <unordered_map>

namespace dia {

namespace {

// {base, third, plural, gerund, past, participle}; nullptr falls back to
// the regular rules (and participle falls back to past, plural to third).
const IrregularEntry kIrregulars[] = {
    // --- core irregular verbs ---
    {"be", "is", nullptr, "being", "was", "been"},
    {"have", "has", nullptr, nullptr, "had", nullptr},
    {"do", nullptr, nullptr, nullptr, "did", "done"},
    {"say", nullptr, nullptr, nullptr, "said", nullptr},
    {"go", nullptr, nullptr, nullptr, "went", "gone"},
    {"get", nullptr, nullptr, nullptr, "got", "gotten"},
    {"make", nullptr, nullptr, nullptr, "made", nullptr},
    {"know", nullptr, nullptr, nullptr, "knew", "known"},
    {"think", nullptr, nullptr, nullptr, "thought", nullptr},
    {"take", nullptr, nullptr, nullptr, "took", "taken"},
    {"see", nullptr, nullptr, nullptr, "saw", "seen"},
    {"come", nullptr, nullptr, nullptr, "came", "come"},
    {"give", nullptr, nullptr, nullptr, "gave", "given"},
    {"find", nullptr, nullptr, nullptr, "found", nullptr},
    {"tell", nullptr, nullptr, nullptr, "told", nullptr},
    {"become", nullptr, nullptr, nullptr, "became", "become"},
    {"show", nullptr, nullptr, nullptr, "showed", "shown"},
    {"leave", nullptr, nullptr, nullptr, "left", nullptr},
    {"feel", nullptr, nullptr, nullptr, "felt", nullptr},
    {"put", nullptr, nullptr, nullptr, "put", nullptr},
    {"bring", nullptr, nullptr, nullptr, "brought", nullptr},
    {"begin", nullptr, nullptr, "beginning", "began", "begun"},
    {"keep", nullptr, nullptr, nullptr, "kept", nullptr},
    {"hold", nullptr, nullptr, nullptr, "held", nullptr},
    {"write", nullptr, nullptr, nullptr, "wrote", "written"},
    {"stand", nullptr, nullptr, nullptr, "stood", nullptr},
    {"hear", nullptr, nullptr, nullptr, "heard", nullptr},
    {"let", nullptr, nullptr, nullptr, "let", nullptr},
    {"mean", nullptr, nullptr, nullptr, "meant", nullptr},
    {"set", nullptr, nullptr, nullptr, "set", nullptr},
    {"meet", nullptr, nullptr, nullptr, "met", nullptr},
    {"run", nullptr, nullptr, nullptr, "ran", "run"},
    {"pay", nullptr, nullptr, nullptr, "paid", nullptr},
    {"sit", nullptr, nullptr, nullptr, "sat", nullptr},
    {"speak", nullptr, nullptr, nullptr, "spoke", "spoken"},
    {"lie", nullptr, nullptr, nullptr, "lay", "lain"},
    {"lead", nullptr, nullptr, nullptr, "led", nullptr},
    {"read", nullptr, nullptr, nullptr, "read", nullptr},
    {"grow", nullptr, nullptr, nullptr, "grew", "grown"},
    {"lose", nullptr, nullptr, nullptr, "lost", nullptr},
    {"fall", nullptr, nullptr, nullptr, "fell", "fallen"},
    {"send", nullptr, nullptr, nullptr, "sent", nullptr},
    {"build", nullptr, nullptr, nullptr, "built", nullptr},
    {"understand", nullptr, nullptr, nullptr, "understood", nullptr},
    {"draw", nullptr, nullptr, nullptr, "drew", "drawn"},
    {"break", nullptr, nullptr, nullptr, "broke", "broken"},
    {"spend", nullptr, nullptr, nullptr, "spent", nullptr},
    {"cut", nullptr, nullptr, nullptr, "cut", nullptr},
    {"rise", nullptr, nullptr, nullptr, "rose", "risen"},
    {"drive", nullptr, nullptr, nullptr, "drove", "driven"},
    {"buy", nullptr, nullptr, nullptr, "bought", nullptr},
    {"wear", nullptr, nullptr, nullptr, "wore", "worn"},
    {"choose", nullptr, nullptr, nullptr, "chose", "chosen"},
    {"seek", nullptr, nullptr, nullptr, "sought", nullptr},
    {"throw", nullptr, nullptr, nullptr, "threw", "thrown"},
    {"catch", nullptr, nullptr, nullptr, "caught", nullptr},
    {"deal", nullptr, nullptr, nullptr, "dealt", nullptr},
    {"win", nullptr, nullptr, nullptr, "won", nullptr},
    {"forget", nullptr, nullptr, "forgetting", "forgot", "forgotten"},
    {"lay", nullptr, nullptr, nullptr, "laid", nullptr},
    {"sell", nullptr, nullptr, nullptr, "sold", nullptr},
    {"fight", nullptr, nullptr, nullptr, "fought", nullptr},
    {"steal", nullptr, nullptr, nullptr, "stole", "stolen"},
    {"teach", nullptr, nullptr, nullptr, "taught", nullptr},
    {"eat", nullptr, nullptr, nullptr, "ate", "eaten"},
    {"swim", nullptr, nullptr, nullptr, "swam", "swum"},
    {"ride", nullptr, nullptr, nullptr, "rode", "ridden"},
    {"sing", nullptr, nullptr, nullptr, "sang", "sung"},
    {"drink", nullptr, nullptr, nullptr, "drank", "drunk"},
    {"blow", nullptr, nullptr, nullptr, "blew", "blown"},
    {"fly", nullptr, nullptr, nullptr, "flew", "flown"},
    {"forbid", nullptr, nullptr, "forbidding", "forbade", "forbidden"},
    {"freeze", nullptr, nullptr, nullptr, "froze", "frozen"},
    {"hide", nullptr, nullptr, nullptr, "hid", "hidden"},
    {"shake", nullptr, nullptr, nullptr, "shook", "shaken"},
    {"swear", nullptr, nullptr, nullptr, "swore", "sworn"},
    {"tear", nullptr, nullptr, nullptr, "tore", "torn"},
    {"wake", nullptr, nullptr, nullptr, "woke", "woken"},
    {"bite", nullptr, nullptr, nullptr, "bit", "bitten"},
    {"bend", nullptr, nullptr, nullptr, "bent", nullptr},
    {"feed", nullptr, nullptr, nullptr, "fed", nullptr},
    {"hang", nullptr, nullptr, nullptr, "hung", nullptr},
    {"hit", nullptr, nullptr, nullptr, "hit", nullptr},
    {"hurt", nullptr, nullptr, nullptr, "hurt", nullptr},
    {"kneel", nullptr, nullptr, nullptr, "knelt", nullptr},
    {"light", nullptr, nullptr, nullptr, "lit", nullptr},
    {"quit", nullptr, nullptr, "quitting", "quit", nullptr},
    {"shoot", nullptr, nullptr, nullptr, "shot", nullptr},
    {"shut", nullptr, nullptr, nullptr, "shut", nullptr},
    {"sleep", nullptr, nullptr, nullptr, "slept", nullptr},
    {"slide", nullptr, nullptr, nullptr, "slid", nullptr},
    {"spin", nullptr, nullptr, nullptr, "spun", nullptr},
    {"strike", nullptr, nullptr, nullptr, "struck", nullptr},
    {"sweep", nullptr, nullptr, nullptr, "swept", nullptr},
    {"swing", nullptr, nullptr, nullptr, "swung", nullptr},
    {"burst", nullptr, nullptr, nullptr, "burst", nullptr},
    {"cost", nullptr, nullptr, nullptr, "cost", nullptr},
    {"dig", nullptr, nullptr, nullptr, "dug", nullptr},
    {"stick", nullptr, nullptr, nullptr, "stuck", nullptr},
    {"sting", nullptr, nullptr, nullptr, "stung", nullptr},
    {"strive", nullptr, nullptr, nullptr, "strove", "striven"},
    {"bear", nullptr, nullptr, nullptr, "bore", "borne"},
    {"beat", nullptr, nullptr, nullptr, "beat", "beaten"},
    {"weep", nullptr, nullptr, nullptr, "wept", nullptr},
    {"wind", nullptr, nullptr, nullptr, "wound", nullptr},
    {"bind", nullptr, nullptr, nullptr, "bound", nullptr},
    {"bleed", nullptr, nullptr, nullptr, "bled", nullptr},
    {"breed", nullptr, nullptr, nullptr, "bred", nullptr},
    {"cast", nullptr, nullptr, nullptr, "cast", nullptr},
    {"cling", nullptr, nullptr, nullptr, "clung", nullptr},
    {"creep", nullptr, nullptr, nullptr, "crept", nullptr},
    {"flee", nullptr, nullptr, nullptr, "fled", nullptr},
    {"fling", nullptr, nullptr, nullptr, "flung", nullptr},
    {"grind", nullptr, nullptr, nullptr, "ground", nullptr},
    {"lend", nullptr, nullptr, nullptr, "lent", nullptr},
    {"ring", nullptr, nullptr, nullptr, "rang", "rung"},
    {"shine", nullptr, nullptr, nullptr, "shone", nullptr},
    {"shrink", nullptr, nullptr, nullptr, "shrank", "shrunk"},
    {"sink", nullptr, nullptr, nullptr, "sank", "sunk"},
    {"slay", nullptr, nullptr, nullptr, "slew", "slain"},
    {"speed", nullptr, nullptr, nullptr, "sped", nullptr},
    {"spring", nullptr, nullptr, nullptr, "sprang", "sprung"},
    {"stink", nullptr, nullptr, nullptr, "stank", "stunk"},
    {"swell", nullptr, nullptr, nullptr, "swelled", "swollen"},
    {"weave", nullptr, nullptr, nullptr, "wove", "woven"},
    {"withdraw", nullptr, nullptr, nullptr, "withdrew", "withdrawn"},
    {"arise", nullptr, nullptr, nullptr, "arose", "arisen"},
    {"awake", nullptr, nullptr, nullptr, "awoke", "awoken"},
    {"overcome", nullptr, nullptr, nullptr, "overcame", "overcome"},
    {"undergo", nullptr, nullptr, nullptr, "underwent", "undergone"},
    {"undertake", nullptr, nullptr, nullptr, "undertook", "undertaken"},
    {"upset", nullptr, nullptr, "upsetting", "upset", nullptr},
    {"spread", nullptr, nullptr, nullptr, "spread", nullptr},
    {"split", nullptr, nullptr, nullptr, "split", nullptr},
    {"spit", nullptr, nullptr, nullptr, "spat", nullptr},
    {"prove", nullptr, nullptr, nullptr, "proved", "proven"},
    {"mistake", nullptr, nullptr, nullptr, "mistook", "mistaken"},
    {"forgive", nullptr, nullptr, nullptr, "forgave", "forgiven"},
    {"foresee", nullptr, nullptr, nullptr, "foresaw", "foreseen"},
    {"mislead", nullptr, nullptr, nullptr, "misled", nullptr},
    {"overtake", nullptr, nullptr, nullptr, "overtook", "overtaken"},
    {"rebuild", nullptr, nullptr, nullptr, "rebuilt", nullptr},
    {"repay", nullptr, nullptr, nullptr, "repaid", nullptr},
    {"rethink", nullptr, nullptr, nullptr, "rethought", nullptr},
    {"rewrite", nullptr, nullptr, nullptr, "rewrote", "rewritten"},
    {"sew", nullptr, nullptr, nullptr, "sewed", "sewn"},
    {"sow", nullptr, nullptr, nullptr, "sowed", "sown"},
    {"dwell", nullptr, nullptr, nullptr, "dwelt", nullptr},

    // --- stress-doubled polysyllables (regular but doubled) ---
    {"admit", nullptr, nullptr, "admitting", "admitted", nullptr},
    {"commit", nullptr, nullptr, "committing", "committed", nullptr},
    {"permit", nullptr, nullptr, "permitting", "permitted", nullptr},
    {"submit", nullptr, nullptr, "submitting", "submitted", nullptr},
    {"omit", nullptr, nullptr, "omitting", "omitted", nullptr},
    {"emit", nullptr, nullptr, "emitting", "emitted", nullptr},
    {"transmit", nullptr, nullptr, "transmitting", "transmitted", nullptr},
    {"refer", nullptr, nullptr, "referring", "referred", nullptr},
    {"prefer", nullptr, nullptr, "preferring", "preferred", nullptr},
    {"defer", nullptr, nullptr, "deferring", "deferred", nullptr},
    {"deter", nullptr, nullptr, "deterring", "deterred", nullptr},
    {"infer", nullptr, nullptr, "inferring", "inferred", nullptr},
    {"transfer", nullptr, nullptr, "transferring", "transferred", nullptr},
    {"confer", nullptr, nullptr, "conferring", "conferred", nullptr},
    {"occur", nullptr, nullptr, "occurring", "occurred", nullptr},
    {"incur", nullptr, nullptr, "incurring", "incurred", nullptr},
    {"recur", nullptr, nullptr, "recurring", "recurred", nullptr},
    {"regret", nullptr, nullptr, "regretting", "regretted", nullptr},
    {"equip", nullptr, nullptr, "equipping", "equipped", nullptr},
    {"control", nullptr, nullptr, "controlling", "controlled", nullptr},
    {"patrol", nullptr, nullptr, "patrolling", "patrolled", nullptr},
    {"propel", nullptr, nullptr, "propelling", "propelled", nullptr},
    {"compel", nullptr, nullptr, "compelling", "compelled", nullptr},
    {"excel", nullptr, nullptr, "excelling", "excelled", nullptr},
    {"rebel", nullptr, nullptr, "rebelling", "rebelled", nullptr},
    {"expel", nullptr, nullptr, "expelling", "expelled", nullptr},
    {"kidnap", nullptr, nullptr, "kidnapping", "kidnapped", nullptr},
    {"program", nullptr, nullptr, "programming", "programmed", nullptr},
    {"format", nullptr, nullptr, "formatting", "formatted", nullptr},

    // --- -c verbs take -ck- ---
    {"panic", nullptr, nullptr, "panicking", "panicked", nullptr},
    {"picnic", nullptr, nullptr, "picnicking", "picnicked", nullptr},
    {"traffic", nullptr, nullptr, "trafficking", "trafficked", nullptr},
    {"mimic", nullptr, nullptr, "mimicking", "mimicked", nullptr},

    // --- irregular noun plurals ---
    {"man", nullptr, "men", nullptr, nullptr, nullptr},
    {"woman", nullptr, "women", nullptr, nullptr, nullptr},
    {"child", nullptr, "children", nullptr, nullptr, nullptr},
    {"person", nullptr, "people", nullptr, nullptr, nullptr},
    {"foot", nullptr, "feet", nullptr, nullptr, nullptr},
    {"tooth", nullptr, "teeth", nullptr, nullptr, nullptr},
    {"goose", nullptr, "geese", nullptr, nullptr, nullptr},
    {"mouse", nullptr, "mice", nullptr, nullptr, nullptr},
    {"louse", nullptr, "lice", nullptr, nullptr, nullptr},
    {"ox", nullptr, "oxen", nullptr, nullptr, nullptr},
    {"cactus", nullptr, "cacti", nullptr, nullptr, nullptr},
    {"fungus", nullptr, "fungi", nullptr, nullptr, nullptr},
    {"nucleus", nullptr, "nuclei", nullptr, nullptr, nullptr},
    {"syllabus", nullptr, "syllabi", nullptr, nullptr, nullptr},
    {"alumnus", nullptr, "alumni", nullptr, nullptr, nullptr},
    {"stimulus", nullptr, "stimuli", nullptr, nullptr, nullptr},
    {"radius", nullptr, "radii", nullptr, nullptr, nullptr},
    {"analysis", nullptr, "analyses", nullptr, nullptr, nullptr},
    {"basis", nullptr, "bases", nullptr, nullptr, nullptr},
    {"crisis", nullptr, "crises", nullptr, nullptr, nullptr},
    {"diagnosis", nullptr, "diagnoses", nullptr, nullptr, nullptr},
    {"thesis", nullptr, "theses", nullptr, nullptr, nullptr},
    {"hypothesis", nullptr, "hypotheses", nullptr, nullptr, nullptr},
    {"oasis", nullptr, "oases", nullptr, nullptr, nullptr},
    {"axis", nullptr, "axes", nullptr, nullptr, nullptr},
    {"criterion", nullptr, "criteria", nullptr, nullptr, nullptr},
    {"phenomenon", nullptr, "phenomena", nullptr, nullptr, nullptr},
    {"datum", nullptr, "data", nullptr, nullptr, nullptr},
    {"medium", nullptr, "media", nullptr, nullptr, nullptr},
    {"bacterium", nullptr, "bacteria", nullptr, nullptr, nullptr},
    {"curriculum", nullptr, "curricula", nullptr, nullptr, nullptr},
    {"stratum", nullptr, "strata", nullptr, nullptr, nullptr},
    {"memorandum", nullptr, "memoranda", nullptr, nullptr, nullptr},
    {"index", nullptr, "indices", nullptr, nullptr, nullptr},
    {"appendix", nullptr, "appendices", nullptr, nullptr, nullptr},
    {"matrix", nullptr, "matrices", nullptr, nullptr, nullptr},
    {"vertex", nullptr, "vertices", nullptr, nullptr, nullptr},
    {"larva", nullptr, "larvae", nullptr, nullptr, nullptr},
    {"wife", nullptr, "wives", nullptr, nullptr, nullptr},
    {"knife", nullptr, "knives", nullptr, nullptr, nullptr},
    {"life", nullptr, "lives", nullptr, nullptr, nullptr},
    {"leaf", nullptr, "leaves", nullptr, nullptr, nullptr},
    {"loaf", nullptr, "loaves", nullptr, nullptr, nullptr},
    {"thief", nullptr, "thieves", nullptr, nullptr, nullptr},
    {"shelf", nullptr, "shelves", nullptr, nullptr, nullptr},
    {"wolf", nullptr, "wolves", nullptr, nullptr, nullptr},
    {"half", nullptr, "halves", nullptr, nullptr, nullptr},
    {"calf", nullptr, "calves", nullptr, nullptr, nullptr},
    {"elf", nullptr, "elves", nullptr, nullptr, nullptr},
    {"scarf", nullptr, "scarves", nullptr, nullptr, nullptr},
    {"sheaf", nullptr, "sheaves", nullptr, nullptr, nullptr},
    {"self", nullptr, "selves", nullptr, nullptr, nullptr},
    {"sheep", nullptr, "sheep", nullptr, nullptr, nullptr},
    {"deer", nullptr, "deer", nullptr, nullptr, nullptr},
    {"fish", nullptr, "fish", nullptr, nullptr, nullptr},
    {"species", nullptr, "species", nullptr, nullptr, nullptr},
    {"series", nullptr, "series", nullptr, nullptr, nullptr},
    {"means", nullptr, "means", nullptr, nullptr, nullptr},
    {"corps", nullptr, "corps", nullptr, nullptr, nullptr},
    {"offspring", nullptr, "offspring", nullptr, nullptr, nullptr},
    {"aircraft", nullptr, "aircraft", nullptr, nullptr, nullptr},
    {"salmon", nullptr, "salmon", nullptr, nullptr, nullptr},
    {"trout", nullptr, "trout", nullptr, nullptr, nullptr},
    {"bison", nullptr, "bison", nullptr, nullptr, nullptr},
    {"swine", nullptr, "swine", nullptr, nullptr, nullptr},

    // --- -o nouns that take a bare -s ---
    {"piano", nullptr, "pianos", nullptr, nullptr, nullptr},
    {"photo", nullptr, "photos", nullptr, nullptr, nullptr},
    {"memo", nullptr, "memos", nullptr, nullptr, nullptr},
    {"logo", nullptr, "logos", nullptr, nullptr, nullptr},
    {"kilo", nullptr, "kilos", nullptr, nullptr, nullptr},
    {"solo", nullptr, "solos", nullptr, nullptr, nullptr},
    {"soprano", nullptr, "sopranos", nullptr, nullptr, nullptr},
    {"casino", nullptr, "casinos", nullptr, nullptr, nullptr},
    {"avocado", nullptr, "avocados", nullptr, nullptr, nullptr},
    {"taco", nullptr, "tacos", nullptr, nullptr, nullptr},
    {"burrito", nullptr, "burritos", nullptr, nullptr, nullptr},
    {"auto", nullptr, "autos", nullptr, nullptr, nullptr},
    {"ego", nullptr, "egos", nullptr, nullptr, nullptr},
    {"demo", nullptr, "demos", nullptr, nullptr, nullptr},
    {"disco", nullptr, "discos", nullptr, nullptr, nullptr},
    {"halo", nullptr, "halos", nullptr, nullptr, nullptr},
    {"typo", nullptr, "typos", nullptr, nullptr, nullptr},
    {"zero", nullptr, "zeros", nullptr, nullptr, nullptr},

    // --- irregular third person where the -s rules misfire ---
    {"quiz", "quizzes", nullptr, "quizzing", "quizzed", nullptr},
};

} // namespace

const IrregularEntry* find_irregular(const std::string& base_lower) {
    static const std::unordered_map<std::string, const IrregularEntry*> index = [] {
        std::unordered_map<std::string, const IrregularEntry*> m;
        for (const IrregularEntry& e : kIrregulars) m.emplace(e.base, &e);
        return m;
    }();
    auto it = index.find(base_lower);
    return it == index.end() ? nullptr : it->second;
}

size_t irregular_table_size() { return std::size(kIrregulars); }

} // namespace dia
