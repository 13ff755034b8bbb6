# Regenerates crates/advtext/data/wordfreq_en.txt, the bundled English
# word-frequency list (Zipf-shaped counts over a hand-curated vocabulary).
# Run from the repository root: python3 tools/gen_wordfreq.py
words = """
the be to of and a in that have i it for not on with he as you do at this but his by from they we say her she or an will my one all would there their what so up out if about who get which go me when make can like time no just him know take people into year your good some could them see other than then now look come its over think also back after use two how our work first well way even new want because any these give day most us is was are been has had were said did get may
man woman child children life world school state family student group country problem hand part place case week company system program question government number night point home water room mother area money story fact month lot right study book eye job word business issue side kind head house service friend father power hour game line end member law car city community name president team minute idea body information face others level office door health person art war history party result change morning reason research girl guy moment air teacher force education
foot boy age policy everything process music market sense nation plan college interest death experience effect class control care field development role effort rate heart drug show leader light voice wife whole police mind finally return free military price report less according decision explain son hope view relationship town road arm difference value building action model season society tax director position player record paper space ground form event official matter center couple site project activity star table need court produce american
kill stop attack hurt hate love fight threat abuse harm insult shame blame bully victim target troll flame rage anger fear panic scare threat danger violence weapon gun knife bomb punch slap beat destroy crush smash wreck ruin burn cut stab shoot choke drown poison
stupid idiot dumb fool loser moron jerk clown trash garbage rubbish filth scum vermin maggot parasite monster creep freak weirdo coward liar cheat fake phony ugly gross nasty awful terrible horrible pathetic worthless useless hopeless disgusting
people person human friend neighbor neighbors stranger strangers everyone everybody anyone somebody nobody children family community nation crowd public audience group team class society folks citizens students teachers workers players members
happy glad joy smile laugh peace calm kind gentle sweet nice lovely beautiful wonderful amazing awesome great fantastic brilliant excellent perfect special bright sunny sunshine flower flowers rainbow butterfly puppy kitten blessing grace hope dream wish thanks gratitude
today tomorrow yesterday morning evening afternoon tonight weekend holiday summer winter spring autumn season weather sunshine rain snow wind storm cloud sky sun moon star
coffee tea water juice milk bread cheese pizza burger dinner lunch breakfast snack fruit apple banana orange grape lemon melon salad soup rice pasta chicken fish meat cake cookie candy sugar salt pepper
music song dance movie film show theater concert band guitar piano drum violin singer artist painter poet writer author novel poem story joke riddle puzzle game sport soccer football basketball baseball tennis golf hockey boxing racing swimming running walking hiking camping fishing hunting
school college university library museum hospital church temple market store shop mall office factory farm garden park street road bridge river lake ocean beach mountain forest desert island village town city capital country border
computer phone tablet laptop screen keyboard mouse camera photo picture video internet website email message text tweet post blog forum chat network signal battery charger cable wire speaker headphone radio television
monday tuesday wednesday thursday friday saturday sunday january february march april may june july august september october november december
red orange yellow green blue purple pink brown black white gray silver gold
zero one two three four five six seven eight nine ten eleven twelve twenty thirty forty fifty hundred thousand million billion
dog cat bird horse cow sheep goat pig rabbit mouse lion tiger bear wolf fox deer snake frog turtle whale shark dolphin eagle hawk owl duck goose swan animal animals
run walk jump climb crawl swim fly drive ride travel move stay leave arrive depart enter exit open close push pull lift drop throw catch hold carry bring send receive buy sell pay earn spend save borrow lend trade share give take keep lose find search seek hide show watch listen hear speak talk tell ask answer call shout whisper sing read write draw paint build break fix repair clean wash cook bake eat drink sleep wake rest play learn teach study train practice test pass fail win help support protect defend serve lead follow join quit start finish begin continue change grow shrink rise fall increase decrease improve worsen
big small large tiny huge giant little short tall long wide narrow thick thin heavy light fast slow quick early late new old young fresh stale hot cold warm cool dry wet hard soft smooth rough sharp dull loud quiet bright dark deep shallow clean dirty empty full rich poor strong weak brave shy proud humble honest wise clever smart silly weird strange normal common rare simple complex easy difficult cheap expensive safe dangerous healthy sick alive dead open closed
hello goodbye please welcome sorry thanks yes maybe okay sure certainly absolutely definitely probably possibly never always often sometimes rarely usually seldom again soon later earlier everywhere somewhere nowhere anywhere here there inside outside upstairs downstairs forward backward left right north south east west
mother father brother sister uncle aunt cousin grandmother grandfather parent parents husband wife son daughter baby twin
doctor nurse lawyer judge officer soldier pilot sailor farmer baker butcher barber tailor carpenter plumber electrician engineer scientist professor principal coach captain chef waiter driver guard clerk cashier manager boss owner worker employee employer
heart brain bone blood skin hair face head neck shoulder chest stomach back waist hip leg knee ankle foot toe arm elbow wrist hand finger thumb nail tooth tongue lip chin cheek nose ear eye eyebrow forehead
happy angry sad mad glad upset worried nervous anxious excited bored tired sleepy hungry thirsty lonely jealous envious grateful hopeful fearful peaceful cheerful joyful gloomy miserable
truth lie fact fiction reality fantasy dream nightmare memory thought idea opinion belief faith doubt trust hope wish desire need want goal plan purpose reason cause effect result outcome consequence
spell spelling letter letters alphabet grammar sentence paragraph chapter page title heading caption label sign symbol mark dot comma period question exclamation quote bracket
apple maple brick stone metal steel iron copper bronze plastic glass wood paper cloth cotton wool silk leather rubber clay sand dirt dust mud rock pebble
train plane ship boat truck bus taxi bicycle motorcycle subway tram ferry rocket helicopter wagon cart sled canoe kayak yacht
window kitchen journey ceiling floor roof wall fence gate yard porch balcony stairs hallway basement attic closet shelf drawer couch sofa chair bench stool lamp candle mirror carpet curtain blanket pillow towel
"""

import re

seen = []
seen_set = set()
for w in re.findall(r"[a-z]+", words):
    if w not in seen_set:
        seen_set.add(w)
        seen.append(w)

lines = []
for rank, w in enumerate(seen):
    count = max(2, int(8_000_000 / (rank + 12) ** 1.08))
    lines.append(f"{w} {count}")

out = "/root/crate/crates/advtext/data/wordfreq_en.txt"
with open(out, "w") as f:
    f.write("\n".join(lines) + "\n")

n5 = sum(1 for w in seen if len(w) >= 5)
print(f"{len(seen)} words total, {n5} with length >= 5 -> {out}")
for probe in ["i", "want", "to", "kill", "you", "end", "vermin", "people", "hello", "help", "love"]:
    assert probe in seen_set, probe
print("probe words all present")
