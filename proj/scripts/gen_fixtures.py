#!/usr/bin/env python3
"""Regenerates the synthetic archive fixtures under tests/fixtures/.

Deterministic (fixed seed); run from the repository root:
    python3 scripts/gen_fixtures.py
"""
import json
import random
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

AUG1 = 1722470400  # 2024-08-01T00:00:00Z

TOPICS = {
    "energia": ("precio luz gas factura tarifa consumo energia electricidad "
                "mercado subida kilovatio potencia").split(),
    "futbol": ("partido liga equipo estadio entrenador jugador portero gol "
               "campo temporada fichaje arbitro").split(),
    "cocina": ("receta cocina horno ingrediente sal aceite tomate sarten "
               "plato postre masa harina").split(),
}

EMOJIS = ["🔥", "⚽", "🍳", "📈", "👍", "❤"]
URLS = ["https://t.me/alpha", "https://example.org/noticias",
        "http://blog.example.com/post"]
MENTIONS = ["alpha_es", "beta_news", "cocina_top"]


def rfc3339(ts):
    import datetime
    return datetime.datetime.fromtimestamp(
        ts, datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S+00:00")


def make_text(rng, vocab):
    n = rng.randint(10, 14)
    words = [rng.choice(vocab) for _ in range(n)]
    text = " ".join(words)
    r = rng.random()
    if r < 0.15:
        text += " " + rng.choice(URLS)
    elif r < 0.25:
        text += " @" + rng.choice(MENTIONS)
    if rng.random() < 0.3:
        text += " " + rng.choice(EMOJIS)
    return text


def make_message(rng, channel_id, message_id, ts, vocab):
    m = {
        "message_id": message_id,
        "channel_id": channel_id,
        "date": rfc3339(ts),
        "text": make_text(rng, vocab),
    }
    if rng.random() < 0.9:
        m["views"] = rng.randint(100, 20000)
    if rng.random() < 0.85:
        m["forwards"] = rng.randint(0, 80)
    if rng.random() < 0.6:
        m["replies_count"] = rng.randint(0, 40)
    if rng.random() < 0.4:
        m["reactions"] = [{"emoji": rng.choice(EMOJIS),
                           "count": rng.randint(1, 50)}]
    r = rng.random()
    if r < 0.1:
        m["media"] = {"kind_hint": "photo"}
    elif r < 0.15:
        m["media"] = {"kind_hint": "document", "mime_type": "video/mp4",
                      "duration_s": rng.randint(5, 300)}
    elif r < 0.18:
        m["media"] = {"kind_hint": "webpage"}
    return m


def write_main_archive():
    out = FIXTURES / "archive"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240801)

    channels = [
        {"channel_id": 101, "username": "alpha", "title": "Alpha Energía",
         "subscribers": 1200, "created_at": "2020-01-15T00:00:00+00:00",
         "description": "Noticias de energía",
         "pinned_message_ids": [3, 17],
         "topics": ["energia", "futbol"],
         "similar_channels": [
             {"id": 102, "title": "Beta Fútbol", "username": "beta"},
             {"id": 103, "title": "Gamma Cocina", "username": "gamma"}]},
        {"channel_id": 102, "username": "beta", "title": "Beta Fútbol",
         "subscribers": 5400, "created_at": "2019-06-02T00:00:00+00:00",
         "description": "Todo sobre la liga",
         "pinned_message_ids": [],
         "topics": ["futbol", "cocina"],
         "similar_channels": [
             {"id": 101, "title": "Alpha Energía", "username": "alpha"}]},
        {"channel_id": 103, "username": "gamma", "title": "Gamma Cocina",
         "subscribers": 880, "created_at": "2022-11-20T00:00:00+00:00",
         "description": "Recetas diarias",
         "pinned_message_ids": [1],
         "topics": ["cocina", "energia"],
         "similar_channels": []},
    ]

    index = []
    for ch in channels:
        topics = ch.pop("topics")
        index.append(ch)
        lines = []
        for i in range(200):
            ts = AUG1 + i * (31 * 86400 // 200) + rng.randint(0, 3600)
            vocab = TOPICS[topics[0]] if rng.random() < 0.7 else TOPICS[topics[1]]
            lines.append(json.dumps(
                make_message(rng, ch["channel_id"], i + 1, ts, vocab),
                ensure_ascii=False))
        (out / f"messages_{ch['channel_id']}.jsonl").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")
    (out / "channels.json").write_text(
        json.dumps(index, ensure_ascii=False, indent=1), encoding="utf-8")

    (FIXTURES / "channels_sample.csv").write_text(
        "id,channel_name,url,cluster,user\r\n"
        "101,Alpha Energía,https://t.me/alpha,seed,alpha\r\n"
        "102,Beta Fútbol,https://t.me/beta,seed,beta\r\n"
        "103,Gamma Cocina,https://t.me/gamma,seed,gamma\r\n",
        encoding="utf-8")


def write_small_archive():
    """One channel, 10 messages on consecutive days (window-filter tests)."""
    out = FIXTURES / "archive_small"
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(10):
        lines.append(json.dumps({
            "message_id": i + 1,
            "channel_id": 7,
            "date": rfc3339(AUG1 + i * 86400),
            "text": f"mensaje {i + 1}",
            "views": 100 * (i + 1),
            "forwards": i,
        }))
    (out / "messages_7.jsonl").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8")
    (out / "channels.json").write_text(json.dumps([{
        "channel_id": 7, "username": "tiny", "title": "Tiny",
        "subscribers": 10, "created_at": "2023-01-01T00:00:00+00:00",
        "description": "", "pinned_message_ids": [],
        "similar_channels": []}]), encoding="utf-8")


def write_snowball_graph():
    """10 channels; cycle 2->8->2 via 8->{2}, self-loop 3->3, 9/10 unreachable."""
    out = FIXTURES / "snowball"
    out.mkdir(parents=True, exist_ok=True)
    edges = {
        1: [2, 3], 2: [4, 1], 3: [3, 5], 4: [6], 5: [6, 7],
        6: [], 7: [8], 8: [2], 9: [10], 10: [],
    }
    index = []
    for cid, outs in edges.items():
        index.append({
            "channel_id": cid, "username": f"ch{cid}", "title": f"Channel {cid}",
            "subscribers": 100 * cid, "created_at": "2021-01-01T00:00:00+00:00",
            "description": "", "pinned_message_ids": [],
            "similar_channels": [
                {"id": t, "title": f"Channel {t}", "username": f"ch{t}"}
                for t in outs]})
        (out / f"messages_{cid}.jsonl").write_text(json.dumps({
            "message_id": 1, "channel_id": cid,
            "date": rfc3339(AUG1 + cid * 3600), "text": f"hola desde {cid}",
            "views": 10, "forwards": 1}) + "\n", encoding="utf-8")
    (out / "channels.json").write_text(json.dumps(index), encoding="utf-8")
    (FIXTURES / "snowball_seed.csv").write_text(
        "id,channel_name,url,cluster,user\r\n"
        "1,Channel 1,https://t.me/ch1,seed,ch1\r\n", encoding="utf-8")


def write_stopwords():
    (FIXTURES / "stopwords_es.txt").write_text(
        "de la el en y a los del se las por un para con no una su al es "
        "lo como mas pero sus le ya o este si porque esta entre cuando "
        "muy sin sobre tambien me hasta hay donde quien desde todo nos "
        "durante todos uno les ni contra otros ese eso ante ellos e esto "
        "mi antes algunos que unos yo otro otras otra el tanto esa estos "
        "mucho quienes nada muchos cual poco ella estar estas algunas algo "
        "nosotros", encoding="utf-8")


if __name__ == "__main__":
    write_main_archive()
    write_small_archive()
    write_snowball_graph()
    write_stopwords()
    print("fixtures written to", FIXTURES)
