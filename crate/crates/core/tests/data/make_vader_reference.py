"""Regenerates vader_reference.jsonl from vaderSentiment 3.3.2.

    pip install vaderSentiment==3.3.2
    python3 make_vader_reference.py > vader_reference.jsonl

The sentence set is drawn from fixed word pools with a fixed seed, so the
output only changes if the reference package changes.
"""
import json
import random

from vaderSentiment.vaderSentiment import SentimentIntensityAnalyzer

random.seed(20230328)

SUBJECTS = ["ChatGPT", "GPT-4", "OpenAI", "this model", "the new release", "AI research",
            "the open letter", "my feed", "Sam", "Elon", "the API", "LLMs", "it", "the pause"]
VERBS = ["is", "was", "looks", "seems", "feels", "sounds", "has been", "will be"]
ADJ = ["good", "great", "bad", "terrible", "amazing", "awful", "helpful", "dangerous",
       "exciting", "boring", "scary", "impressive", "useless", "brilliant", "harmful",
       "risky", "fine", "nice", "horrible", "wonderful", "sad", "happy", "funny", "weird",
       "ok", "stupid", "smart", "safe", "broken", "fantastic"]
BOOST = ["very", "extremely", "really", "so", "kinda", "slightly", "barely", "totally",
         "incredibly", "somewhat", "hardly", "sort of", "kind of", "most", "less"]
NEG = ["not", "never", "isn't", "don't", "without", "hardly", "wasn't", "can't", "no"]
TAILS = ["", "", "", "!", "!!", "!!!", "?", "??", "???!", ".", "...", " :)", " :(", " :D",
         " 😀", " 😡", " 😂", " lol", " #AI", " https://t.co/x1y2", " @OpenAI", " 👍"]
CONNECT = [" but ", " and ", ", yet ", ". ", " BUT ", " although "]
IDIOMS = ["yeah right", "the bomb", "kiss of death", "to die for", "bad ass",
          "at least", "very least", "the shit", "beating heart", "bus stop"]


def clause():
    parts = [random.choice(SUBJECTS), random.choice(VERBS)]
    r = random.random()
    if r < 0.25:
        parts.append(random.choice(NEG))
    if random.random() < 0.4:
        parts.append(random.choice(BOOST))
    adj = random.choice(ADJ)
    if random.random() < 0.12:
        adj = adj.upper()
    parts.append(adj)
    if random.random() < 0.08:
        parts.append(random.choice(IDIOMS))
    return " ".join(parts)


def sentence():
    s = clause()
    if random.random() < 0.45:
        s += random.choice(CONNECT) + clause()
    if random.random() < 0.15:
        s = "no " + random.choice(ADJ) + " " + s
    return s + random.choice(TAILS)


analyzer = SentimentIntensityAnalyzer()
texts = []
seen = set()
while len(texts) < 200:
    t = sentence()
    if t not in seen:
        seen.add(t)
        texts.append(t)
for t in texts:
    print(json.dumps({"text": t, "compound": analyzer.polarity_scores(t)["compound"]},
                     ensure_ascii=False))
