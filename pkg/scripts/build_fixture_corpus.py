#!/usr/bin/env python3
"""Regenerate the 17-case fixture dataset under tests/fixtures/dataset.

Each reference diagram is synthesized so that its structural counts (nodes,
nesting depth, containers, relations, populated top layers) equal one row of
the corpus table. Names come from small per-project vocabularies; layout and
syntax choices are drawn from a seeded RNG so the output is stable.

    python3 scripts/build_fixture_corpus.py [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

# (case_id, title, node, level, container, relation, sublayer, language)
TABLE = [
    ("ai_music_creation", "AI Music Creation", 25, 3, 10, 2, 2, "en"),
    ("campus_helper", "Campus Helper", 29, 6, 8, 12, 2, "zh"),
    ("dl_sharing_platform", "DL Sharing Platform", 14, 3, 4, 2, 2, "en"),
    ("itas", "ITAS (Text Annotation)", 15, 6, 6, 10, 1, "en"),
    ("smart_recipe", "Smart Recipe", 14, 5, 6, 4, 2, "en"),
    ("llm_adventure_game", "LLM Adventure Game", 18, 5, 7, 10, 2, "en"),
    ("pocd", "POCD (Inconsistency)", 27, 2, 6, 4, 2, "en"),
    ("deepcode", "DeepCode", 33, 8, 13, 21, 4, "en"),
    ("epidemiology_investigation", "Epidemiology Investigation", 26, 3, 12, 5, 2, "zh"),
    ("retool", "ReTool", 13, 4, 6, 5, 2, "en"),
    ("prompthub", "PromptHub", 39, 3, 13, 5, 2, "en"),
    ("indoor_fitness_app", "Indoor Fitness App", 25, 4, 4, 10, 1, "en"),
    ("model_evolution_visualizer", "Model Evolution Visualizer", 10, 4, 4, 10, 1, "en"),
    ("mytorch", "MyTorch", 37, 5, 16, 4, 3, "en"),
    ("achievement_platform", "Achievement Platform", 17, 4, 7, 28, 2, "en"),
    ("lab_internship_platform", "Lab Internship Platform", 32, 4, 8, 3, 2, "zh"),
    ("easylatex", "EasyLaTeX", 16, 4, 6, 3, 2, "en"),
]

DOMAIN = {
    "ai_music_creation": (
        ["Melody Generator", "Lyric Composer", "Style Transfer Engine", "Track Mixer", "Music Library",
         "Audio Renderer", "Chord Analyzer", "Playlist Service", "Vocal Synthesizer", "Beat Maker"],
        ["Composition", "Audio Processing", "Creative Tools", "Model Serving", "Media Assets"],
    ),
    "campus_helper": (
        ["课程表服务", "失物招领", "二手交易", "校园公告", "食堂点评", "社团活动", "图书查询", "成绩查询",
         "宿舍报修", "校车时刻"],
        ["校园服务", "生活服务", "学习服务", "信息中心", "消息模块", "数据采集"],
    ),
    "dl_sharing_platform": (
        ["Model Upload", "Dataset Browser", "Model Registry", "Training Job Runner", "Leaderboard",
         "Inference Sandbox"],
        ["Model Hub"],
    ),
    "itas": (
        ["Annotation Editor", "Label Schema Manager", "Task Assigner", "Agreement Checker", "Export Service",
         "Pre-annotation Model", "Corpus Importer"],
        ["Annotation Core", "Quality Control", "Task Management", "Model Assist"],
    ),
    "smart_recipe": (
        ["Recipe Recommender", "Ingredient Recognizer", "Nutrition Calculator", "Meal Planner",
         "Shopping List"],
        ["Recipe Engine", "Vision Module", "Planning"],
    ),
    "llm_adventure_game": (
        ["Story Engine", "Dialogue Manager", "World State Store", "Quest Generator", "Character Memory",
         "Prompt Builder", "LLM Client", "Save Manager"],
        ["Narrative Core", "Game Runtime", "Model Access"],
    ),
    "pocd": (
        ["Document Parser", "Claim Extractor", "Consistency Checker", "Evidence Retriever",
         "Report Generator", "Rule Engine", "Diff Viewer", "Annotation Store"],
        [],
    ),
    "deepcode": (
        ["Paper Parser", "Code Planner", "Repository Indexer", "Code Generator", "Test Runner",
         "Agent Orchestrator", "Memory Manager", "Tool Router", "Sandbox Executor", "Retrieval Service",
         "Prompt Templates", "LLM Gateway", "Evaluation Reporter", "Workspace Manager"],
        ["Agent System", "Planning Agents", "Coding Agents", "Execution Agents", "Reasoning Core",
         "Tool Chain", "Code Intelligence", "Runtime Sandbox", "Knowledge Base"],
    ),
    "epidemiology_investigation": (
        ["病例登记", "流调问卷", "轨迹分析", "密接追踪", "风险地图", "报告生成", "数据上报", "样本管理"],
        ["流调业务", "分析模块", "地图服务", "数据交换", "统计报表", "采样管理", "审核流程", "通知中心",
         "权限管理", "日志审计"],
    ),
    "retool": (
        ["Tool Registry", "Reasoning Planner", "Code Interpreter", "Result Verifier", "Trace Logger"],
        ["Tool Runtime", "Planner Core", "Verification"],
    ),
    "prompthub": (
        ["Prompt Editor", "Prompt Versioning", "Template Marketplace", "Evaluation Runner", "Model Connector",
         "Usage Analytics", "Team Workspace", "Prompt Search", "Comment Service", "Billing Service",
         "Rating Service", "Playground"],
        ["Prompt Management", "Collaboration", "Evaluation", "Marketplace", "Analytics", "Integration",
         "Account Center", "Billing", "Content Review", "Model Adapters", "Search"],
    ),
    "indoor_fitness_app": (
        ["Workout Planner", "Pose Estimator", "Rep Counter", "Heart Rate Sync", "Progress Tracker",
         "Coach Chat", "Video Library", "Challenge Board", "Calorie Estimator", "Device Pairing"],
        ["Training", "Motion Analysis"],
    ),
    "model_evolution_visualizer": (
        ["Checkpoint Loader", "Weight Diff Engine", "Timeline View", "Metric Plotter", "Layer Inspector",
         "Export Panel"],
        ["Visualization", "Analysis Engine"],
    ),
    "mytorch": (
        ["Tensor Core", "Autograd Engine", "Linear Layer", "Conv Layer", "Optimizer SGD", "Optimizer Adam",
         "Loss Functions", "DataLoader", "Dataset API", "CUDA Kernels", "CPU Kernels", "Serializer",
         "Module Base", "Parameter Store", "Graph Tracer"],
        ["Core", "Autograd", "NN Modules", "Layers", "Optimizers", "Data", "Backends", "Kernels",
         "Utilities", "Functional", "Serialization", "Tracing", "Losses"],
    ),
    "achievement_platform": (
        ["Badge Engine", "Achievement Rules", "Event Collector", "Leaderboard Service", "Profile Page",
         "Reward Store", "Streak Tracker", "Admin Panel"],
        ["Gamification", "Engagement", "Rewards", "Administration", "Events"],
    ),
    "lab_internship_platform": (
        ["实习岗位发布", "简历投递", "导师审批", "实验室介绍", "面试安排", "实习周报", "考核评价", "证明开具",
         "消息推送", "学生档案"],
        ["岗位管理", "申请流程", "过程管理", "评价管理", "档案中心", "通知服务"],
    ),
    "easylatex": (
        ["Formula Recognizer", "LaTeX Editor", "Template Gallery", "PDF Compiler", "Snippet Library",
         "Handwriting Canvas", "Export Service"],
        ["Editing", "Recognition", "Compilation", "Templates"],
    ),
}

GENERIC = {
    "application": {
        "en": ["Web Frontend", "Mobile App", "Admin Console", "API Gateway", "User Service", "Search Service",
               "Recommendation Service", "Report Service", "Dashboard", "Notification Center", "Comment Module",
               "Settings Page", "Help Center", "Feedback Service"],
        "zh": ["小程序前端", "管理后台", "网关服务", "用户服务", "搜索服务", "推荐服务", "消息中心", "个人中心",
               "反馈服务", "统计看板"],
    },
    "support": {
        "en": ["Auth Service", "Message Queue", "Redis Cache", "Task Scheduler", "Logging Service",
               "Config Center", "Monitoring", "Email Sender", "Rate Limiter", "Audit Trail", "Service Registry",
               "File Converter"],
        "zh": ["认证服务", "消息队列", "缓存服务", "定时任务", "日志服务", "配置中心", "监控告警", "短信服务",
               "审计服务", "文件服务"],
    },
    "infrastructure": {
        "en": ["MySQL Database", "MongoDB", "Object Storage", "File Server", "Docker Host", "Kubernetes Cluster",
               "CDN", "Backup Storage", "Vector Store", "GPU Server", "Elasticsearch"],
        "zh": ["MySQL数据库", "对象存储", "文件服务器", "容器集群", "备份存储", "Redis集群", "向量数据库",
               "GPU服务器"],
    },
}

KIND_BY_WORD = [
    (("database", "mysql", "mongodb", "数据库", "store", "storage", "elasticsearch", "存储"), "database"),
    (("queue", "队列"), "queue"),
    (("cluster", "cdn", "集群"), "cloud"),
    (("server", "host", "服务器"), "node"),
]

LAYER_NAMES = {
    "en": [("application", "Application Layer"), ("support", "Support Layer"),
           ("infrastructure", "Infrastructure Layer"), ("external", "External Services Layer")],
    "zh": [("application", "应用层"), ("support", "支撑层"), ("infrastructure", "基础设施层"),
           ("external", "外部服务层")],
}
# synonyms used when a shallow diagram needs several top-level containers per layer
LAYER_ALIASES = {
    "application": ["Presentation Layer", "Frontend", "Business Logic Layer", "API Layer"],
    "support": ["Middleware", "Platform Layer", "Shared Services"],
    "infrastructure": ["Data Layer", "Storage", "Persistence Layer"],
}
CONTAINER_KEYWORDS = ["package", "package", "folder", "rectangle", "frame", "node"]


@dataclass
class Node:
    nid: str
    name: str
    kind: str
    parent: Node | None
    layer: str
    children: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return 1 if self.parent is None else self.parent.depth + 1


def _leaf_kind(name: str) -> str:
    low = name.lower()
    for words, kind in KIND_BY_WORD:
        if any(w in low for w in words):
            return kind
    return "component"


class NamePool:
    def __init__(self, case_id: str, lang: str, rng: random.Random):
        leaves, containers = DOMAIN[case_id]
        self.rng = rng
        self.lang = lang
        self.domain_leaves = list(leaves)
        self.domain_containers = list(containers)
        self.generic = {k: list(v[lang]) for k, v in GENERIC.items()}
        self.used: set[str] = set()
        self.counter = 0

    def _take(self, pool: list[str]) -> str | None:
        while pool:
            name = pool.pop(0)
            if name not in self.used:
                self.used.add(name)
                return name
        return None

    def leaf(self, layer: str) -> str:
        if layer in ("infrastructure",):
            order = [self.generic["infrastructure"], self.domain_leaves, self.generic["support"]]
        elif layer == "support":
            order = [self.generic["support"], self.domain_leaves, self.generic["infrastructure"]]
        else:
            order = [self.domain_leaves, self.generic["application"], self.generic["support"]]
        if layer == "support" and self.domain_leaves and self.rng.random() < 0.5:
            order = [self.domain_leaves] + order
        for pool in order:
            name = self._take(pool)
            if name:
                return name
        self.counter += 1
        return f"Module {self.counter}" if self.lang == "en" else f"模块{self.counter}"

    def container(self) -> str:
        name = self._take(self.domain_containers)
        if name:
            return name
        self.counter += 1
        return f"Subsystem {self.counter}" if self.lang == "en" else f"子系统{self.counter}"


def build_tree(case_id, n, level, c, s, lang, rng) -> list[Node]:
    names = NamePool(case_id, lang, rng)
    nodes: list[Node] = []
    ids = iter(range(1, 10_000))

    def add(name, kind, parent, layer):
        node = Node(f"e{next(ids)}", name, kind, parent, layer)
        if parent:
            parent.children.append(node)
        nodes.append(node)
        return node

    layers = [add(name, "package", None, key) for key, name in LAYER_NAMES[lang][:s]]
    containers = list(layers)
    # the chain that realizes the nesting depth
    parent = layers[0]
    for _ in range(level - 2):
        parent = add(names.container(), rng.choice(CONTAINER_KEYWORDS), parent, parent.layer)
        containers.append(parent)
    deepest = parent
    extra = c - s - max(0, level - 2)
    assert extra >= 0, case_id
    for _ in range(extra):
        if level == 2:
            layer = rng.choice(layers[:2] if s >= 2 else layers)
            alias_pool = [a for a in LAYER_ALIASES[layer.layer] if a not in names.used]
            name = alias_pool[0]
            names.used.add(name)
            containers.append(add(name, "package", None, layer.layer))
        else:
            hosts = [k for k in containers if k.depth <= level - 2]
            host = rng.choice(hosts)
            containers.append(add(names.container(), rng.choice(CONTAINER_KEYWORDS), host, host.layer))
    leaf_count = n - c
    bare = [k for k in containers if not k.children]
    if deepest not in bare:
        bare.insert(0, deepest)
    assert leaf_count >= len(bare), case_id
    for host in bare:
        add(names.leaf(host.layer), None, host, host.layer)
    for _ in range(leaf_count - len(bare)):
        host = rng.choice(containers)
        add(names.leaf(host.layer), None, host, host.layer)
    for node in nodes:
        if node.kind is None:
            node.kind = _leaf_kind(node.name)
    return nodes


_LAYER_RANK = {"application": 0, "support": 1, "infrastructure": 2, "external": 3}


def build_edges(nodes: list[Node], r: int, rng: random.Random) -> list[tuple[Node, Node]]:
    leaves = [x for x in nodes if not x.children]
    edges: list[tuple[Node, Node]] = []
    seen = set()
    attempts = 0
    while len(edges) < r and attempts < 10_000:
        attempts += 1
        a, b = rng.sample(leaves, 2)
        # mostly downward flows: application -> support -> infrastructure
        if _LAYER_RANK[a.layer] > _LAYER_RANK[b.layer] and rng.random() < 0.8:
            a, b = b, a
        if (a.nid, b.nid) in seen:
            continue
        seen.add((a.nid, b.nid))
        edges.append((a, b))
    assert len(edges) == r
    return edges


EN_LABELS = ["calls", "reads", "writes", "publishes", "queries", "uses", "stores", "notifies"]
ZH_LABELS = ["调用", "读取", "写入", "推送", "查询", "订阅"]


def render(title, nodes, edges, lang, rng) -> str:
    style = rng.choice(["alias", "bracket", "mixed"])
    ref: dict[str, str] = {}
    lines = ["@startuml", f"title {title}"]
    if rng.random() < 0.5:
        lines.append("skinparam componentStyle rectangle")
    if rng.random() < 0.3:
        lines.append("left to right direction")
    lines.append("")

    def emit(node: Node, indent: int):
        pad = "  " * indent
        if node.children:
            alias = f"P{node.nid[1:]}"
            ref[node.nid] = alias
            lines.append(f'{pad}{node.kind} "{node.name}" as {alias} {{')
            for child in node.children:
                emit(child, indent + 1)
            lines.append(f"{pad}}}")
            return
        use_alias = style == "alias" or (style == "mixed" and rng.random() < 0.5)
        if node.kind == "component" and not use_alias and "[" not in node.name:
            lines.append(f"{pad}[{node.name}]")
            ref[node.nid] = f"[{node.name}]"
            return
        alias = f"C{node.nid[1:]}"
        stereo = " <<service>>" if node.kind == "component" and rng.random() < 0.15 else ""
        lines.append(f'{pad}{node.kind} "{node.name}" as {alias}{stereo}')
        ref[node.nid] = alias

    for node in nodes:
        if node.parent is None:
            emit(node, 0)
    lines.append("")
    labels = EN_LABELS if lang == "en" else ZH_LABELS
    for a, b in edges:
        arrow = rng.choice(["-->", "-->", "->", "..>", "-down->"])
        label = f" : {rng.choice(labels)}" if rng.random() < 0.6 else ""
        lines.append(f"{ref[a.nid]} {arrow} {ref[b.nid]}{label}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


# -- PRDs --------------------------------------------------------------------------

EN_HEADINGS = [
    ["# System Introduction", "# Core Objectives", "# Functional Features", "# Technical Constraints",
     "# Non-functional Requirements", "# System Architecture Description"],
    ["## 1. Introduction", "## 2. Core Objectives", "## 3. Functional Requirements", "## 4. Technical Constraints",
     "## 5. Non-Functional Requirements", "## 6. System Architecture"],
    ["# 1 System Overview", "# 2 Goals", "# 3 Functional Features", "# 4 Constraints",
     "# 5 Quality Attributes", "# 6 Architecture Description"],
]
ZH_HEADINGS = ["## 一、系统介绍", "## 二、核心目标", "## 三、功能需求", "## 四、技术约束", "## 五、非功能需求",
               "## 六、系统架构描述"]


def prd_text(case_id, title, nodes, lang, rng) -> str:
    leaves = [x for x in nodes if not x.children]
    layers = [x for x in nodes if x.parent is None and x.children]
    names = [x.name for x in leaves]
    if lang == "zh":
        heads = ZH_HEADINGS
        bodies = [
            f"项目名称：{title}。本系统面向高校师生，提供一站式的线上服务平台。",
            "\n".join(f"- 目标{i + 1}：完善{n}相关能力。" for i, n in enumerate(names[:3])),
            "\n".join(f"- 当用户发起请求时，{n}执行相应的业务处理。" for n in names[:6]),
            "- 后端采用 Python 与 MySQL。\n- 前端采用小程序框架。",
            "- 核心接口响应时间不超过 500ms。\n- 支持 1000 名并发用户。",
            "系统分为" + "、".join(x.name for x in layers) + "。",
        ]
        lines = [f"# {title} 需求文档", ""]
    else:
        heads = rng.choice(EN_HEADINGS)
        bodies = [
            f"Project: {title}. The system gives its users a single place to work with "
            f"{names[0].lower()} and related tools.",
            "\n".join(f"- Objective {i + 1}: deliver a reliable {n.lower()}." for i, n in enumerate(names[:3])),
            "\n".join(f"- When a user submits a request, the {n} performs the corresponding action."
                      for n in names[:6]),
            "- Backend services are written in Python.\n- Persistent data lives in a relational database.",
            "- Interactive requests complete within 500 ms.\n- The service tolerates the loss of one node.",
            "The architecture is divided into " + ", ".join(x.name for x in layers) + ".\n\n"
            + "\n".join(f"- {x.name}: " + ", ".join(c.name for c in x.children) for x in layers),
        ]
        lines = [f"# {title} PRD", ""] if heads[0].startswith("##") else []
    for h, b in zip(heads, bodies):
        lines += [h, "", b, ""]
    return "\n".join(lines)


def build(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for idx, (case_id, title, n, level, c, r, s, lang) in enumerate(TABLE):
        rng = random.Random(1000 + idx)
        nodes = build_tree(case_id, n, level, c, s, lang, rng)
        edges = build_edges(nodes, r, rng)
        d = out / case_id
        d.mkdir(exist_ok=True)
        (d / "reference.puml").write_text(render(title, nodes, edges, lang, rng), encoding="utf-8")
        (d / "prd.md").write_text(prd_text(case_id, title, nodes, lang, rng), encoding="utf-8")
        (d / "meta.json").write_text(json.dumps({"title": title, "language": lang}, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
    print(f"wrote {len(TABLE)} cases to {out}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "tests" / "fixtures" / "dataset")
    build(ap.parse_args().out)


if __name__ == "__main__":
    main()
