"""
Caption-vs-abstract scoring without embeddings
==============================================

Three classic lexical scorers rank a paper's figure captions against its
abstract: ROUGE-L (longest common subsequence), BM25 (term weighting),
and CIDEr (tf-idf n-gram cosine). No neural nets, no external data.

Run with: python3 demos/02_lexical_scoring.py
"""

from gareco import Bm25Stats, IdfTable, bm25, cider, normalize, rouge_l, strip_caption_tags

abstract = ("We rank candidate figures by comparing captions against the "
            "abstract and report a confidence adjusted metric.")

captions = {
    "f1": "Figure 1: Training pipeline and loss curves.",
    "f2": "Fig. 2: Ranking candidate figures by caption and abstract similarity.",
    "f3": "Figure 3: Dataset statistics.",
}

# Captions arrive with figure tags; scoring text never includes them.
cleaned = {fid: strip_caption_tags(text) for fid, text in captions.items()}
print("cleaned captions:")
for fid, text in cleaned.items():
    print(f"  {fid}: {text}")

query = normalize(abstract)
docs = {fid: normalize(text) for fid, text in cleaned.items()}
print("\nquery tokens:", query)

# ROUGE-L: recall-weighted LCS overlap, so captions that cover more of
# the abstract's phrasing win even when they add extra words.
print("\nROUGE-L F-scores:")
for fid, doc in docs.items():
    print(f"  {fid}: {rouge_l(doc, query):.4f}")

# BM25 scores each abstract term against a caption, with document
# frequencies taken from the candidate pool itself.
stats = Bm25Stats.from_pool(list(docs.values()))
print("\nBM25 scores:")
for fid, doc in docs.items():
    print(f"  {fid}: {bm25(query, doc, stats):.4f}")

# CIDEr compares tf-idf weighted n-grams up to length 4. The idf table
# comes from the same pool, so shared phrasing is discounted.
idf = IdfTable.from_pool(list(docs.values()))
print("\nCIDEr scores:")
for fid, doc in docs.items():
    print(f"  {fid}: {cider(doc, query, idf):.4f}")

# All three agree on the winner here: f2 reuses the abstract's own words.
best = max(docs, key=lambda fid: rouge_l(docs[fid], query))
print(f"\nbest caption by ROUGE-L: {best}")
