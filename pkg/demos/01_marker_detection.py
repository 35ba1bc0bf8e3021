#!/usr/bin/env python3
"""Walk through the three linguistic markers on hand-written posts.

Shows the normalization step (URLs, mentions, hashtags, emoticons out;
apostrophes kept), then negation and plural-agreement detection, then a
per-user profile with the three rates.
"""
from sociolex.corpus import UserTimeline, preprocess, RawPost
from sociolex.lingmark import PluralLexicon, detect_negation, detect_plural, profile_user


def raw(i, text):
    return RawPost(post_id=f"p{i}", author_id="demo", timestamp=1_600_000_000 + i,
                   utc_offset_minutes=60, text=text, is_retweet=False,
                   mentioned_ids=(), coords=None)


POSTS = [
    "Je ne fume pas, promis @ami http://sante.fr",
    "je fume pas :)",
    "On n'entend rien ici!!",
    "Les chevaux sont beaux #cheval",
    "regarde les cheval la-bas",
    "trois maisons et des jardins",
    "RT ce message est ignore",
]

# --- normalization ---------------------------------------------------------
print("normalized posts:")
clean_posts = []
for i, text in enumerate(POSTS):
    post = raw(i, text)
    if text.startswith("RT "):
        post = RawPost(**{**post.__dict__, "is_retweet": True})
    clean = preprocess(post)
    if clean is None:
        print(f"  {text!r:55} -> dropped (retweet)")
        continue
    clean_posts.append(clean)
    print(f"  {text!r:55} -> {clean.text_marker!r}")

# --- per-post detection -----------------------------------------------------
lexicon = PluralLexicon.bundled()
print(f"\nbundled lexicon: {len(lexicon)} singular/plural pairs")
print("per-post marker verdicts:")
for clean in clean_posts:
    neg = detect_negation(clean.text_marker)
    plu = detect_plural(clean.tokens, lexicon)
    print(f"  {clean.text_marker!r:50} negation={neg!s:12} plural={plu}")

# --- user profile -----------------------------------------------------------
counts, profile = profile_user(UserTimeline("demo", clean_posts), lexicon)
print("\nuser profile:")
print(f"  negation: {counts.n_cn} standard / {counts.n_incn} nonstandard "
      f"-> rate {profile.L_cn:.2f}")
print(f"  plural:   {counts.n_cp} standard / {counts.n_incp} nonstandard "
      f"-> rate {profile.L_cp:.2f}")
print(f"  vocabulary: {counts.n_unique_words} distinct words over "
      f"{counts.n_tweets} posts -> {profile.L_vs:.2f} per post")
