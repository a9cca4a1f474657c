"""Closed bilingual lexicon for the templated corpus."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Person:
    key: str
    subj: str  # English subject form
    obj: str  # English object form
    zh: str


@dataclass(frozen=True)
class Thing:
    key: str
    en: str
    zh: str
    plural: bool = False


@dataclass(frozen=True)
class Verb:
    key: str
    past: str
    participle: str
    zh: str


def _noun(key, zh):
    return Person(key, f"the {key}", f"the {key}", zh)


PEOPLE = (
    Person("they", "they", "them", "他们"),
    Person("he", "he", "him", "他"),
    Person("she", "she", "her", "她"),
    Person("we", "we", "us", "我们"),
    _noun("cowboy", "牛仔"),
    _noun("sailor", "水手"),
    _noun("teacher", "老师"),
    _noun("doctor", "医生"),
    _noun("farmer", "农夫"),
    _noun("student", "学生"),
    _noun("chef", "厨师"),
    _noun("driver", "司机"),
    _noun("nurse", "护士"),
    _noun("artist", "画家"),
    _noun("soldier", "士兵"),
    _noun("pilot", "飞行员"),
    _noun("writer", "作家"),
    _noun("singer", "歌手"),
    _noun("lawyer", "律师"),
    _noun("baker", "面包师"),
    _noun("king", "国王"),
    _noun("queen", "王后"),
    _noun("boy", "男孩"),
    _noun("girl", "女孩"),
)

THINGS = (
    Thing("trees", "many trees", "很多树", plural=True),
    Thing("book", "the book", "那本书"),
    Thing("letter", "the letter", "那封信"),
    Thing("ball", "the ball", "那个球"),
    Thing("apple", "the apple", "那个苹果"),
    Thing("cake", "the cake", "那块蛋糕"),
    Thing("painting", "the painting", "那幅画"),
    Thing("box", "the box", "那个盒子"),
    Thing("cup", "the cup", "那个杯子"),
    Thing("flowers", "the flowers", "那些花", plural=True),
    Thing("map", "the map", "那张地图"),
    Thing("key", "the key", "那把钥匙"),
    Thing("ticket", "the ticket", "那张票"),
    Thing("gift", "the gift", "那份礼物"),
    Thing("hat", "the hat", "那顶帽子"),
    Thing("pen", "the pen", "那支笔"),
    Thing("bag", "the bag", "那个包"),
    Thing("watch", "the watch", "那块手表"),
    Thing("coin", "the coin", "那枚硬币"),
    Thing("photo", "the photo", "那张照片"),
    Thing("toy", "the toy", "那个玩具"),
    Thing("bottle", "the bottle", "那个瓶子"),
    Thing("shoes", "the shoes", "那双鞋", plural=True),
    Thing("chair", "the chair", "那把椅子"),
)

TRANSITIVE_VERBS = (
    Verb("plant", "planted", "planted", "种"),
    Verb("see", "saw", "seen", "看见"),
    Verb("find", "found", "found", "找到"),
    Verb("wash", "washed", "washed", "洗"),
    Verb("move", "moved", "moved", "搬"),
    Verb("buy", "bought", "bought", "买"),
    Verb("take", "took", "taken", "拿走"),
    Verb("break", "broke", "broken", "打破"),
    Verb("paint", "painted", "painted", "涂"),
    Verb("open", "opened", "opened", "打开"),
    Verb("choose", "chose", "chosen", "选"),
    Verb("lose", "lost", "lost", "丢"),
    Verb("carry", "carried", "carried", "提"),
    Verb("hide", "hid", "hidden", "藏"),
    Verb("clean", "cleaned", "cleaned", "擦"),
)

DITRANSITIVE_VERBS = (
    Verb("give", "gave", "given", "给"),
    Verb("send", "sent", "sent", "送"),
    Verb("mail", "mailed", "mailed", "寄"),
    Verb("pass", "passed", "passed", "递"),
    Verb("lend", "lent", "lent", "借"),
    Verb("sell", "sold", "sold", "卖"),
    Verb("throw", "threw", "thrown", "扔"),
    Verb("hand", "handed", "handed", "交"),
    Verb("show", "showed", "shown", "展示"),
    Verb("bring", "brought", "brought", "带"),
    Verb("offer", "offered", "offered", "提供"),
    Verb("toss", "tossed", "tossed", "抛"),
)

PEOPLE_BY_KEY = {p.key: p for p in PEOPLE}
THINGS_BY_KEY = {t.key: t for t in THINGS}
TRANSITIVE_BY_KEY = {v.key: v for v in TRANSITIVE_VERBS}
DITRANSITIVE_BY_KEY = {v.key: v for v in DITRANSITIVE_VERBS}
