"""Regenerates the bundled .arch fixtures (desk-scale analogs).

Run from the repository root with the package installed:
    python scripts/gen_fixtures.py
"""

from archsteer.model import (
    ArchitectureModel,
    Component,
    Link,
    Operation,
    ProcNode,
    Scenario,
    Step,
    load_model,
    serialize,
)


def comp(cid, ops, theta, fmt="json"):
    return Component(
        id=cid,
        operations=tuple(Operation(id=o, demand=d) for o, d in ops),
        failure_prob=theta,
        data_format=fmt,
    )


def sc(sid, prob, n, z, steps):
    return Scenario(
        id=sid,
        prob=prob,
        population=n,
        think_time=z,
        steps=tuple(Step(operation_ref=o, msg_size=m) for o, m in steps),
    )


def ttbs():
    components = (
        comp("gateway", [("gw_route", 0.002)], 0.0004),
        comp("auth", [("auth_login", 0.012), ("auth_token", 0.004)], 0.0012),
        comp("user", [("user_load", 0.008), ("user_save", 0.010)], 0.0008),
        comp("ticket", [("ticket_query", 0.015), ("ticket_hold", 0.009)], 0.0015),
        comp("order", [("order_create", 0.012), ("order_update", 0.008)], 0.0010),
        comp("payment", [("pay_charge", 0.020)], 0.0020),
        comp("notify", [("notify_send", 0.005)], 0.0005),
        comp("route", [("route_plan", 0.018)], 0.0018, "protobuf"),
        comp("train", [("train_info", 0.007)], 0.0006, "protobuf"),
        comp("station", [("station_info", 0.006)], 0.0006, "protobuf"),
        comp("price", [("price_quote", 0.011)], 0.0009),
    )
    nodes = tuple(ProcNode(id=f"n{i}", speed_factor=1.0) for i in range(1, 12))
    deployment = {
        "gateway": "n1",
        "auth": "n2",
        "user": "n3",
        "ticket": "n4",
        "order": "n5",
        "payment": "n6",
        "notify": "n7",
        "route": "n8",
        "train": "n9",
        "station": "n10",
        "price": "n11",
    }
    star = [(f"l{i}", "n1", f"n{i + 1}", 0.0008) for i in range(1, 11)]
    cross = [("l11", "n4", "n5", 0.0005), ("l12", "n8", "n9", 0.0005), ("l13", "n8", "n10", 0.0005)]
    links = tuple(Link(id=lid, endpoints=(a, b), failure_prob=psi) for lid, a, b, psi in star + cross)
    scenarios = (
        sc(
            "login",
            0.4,
            12,
            2.0,
            [
                ("gw_route", 1.2),
                ("auth_login", 0.8),
                ("user_load", 2.0),
                ("auth_token", 0.5),
                ("notify_send", 0.7),
            ],
        ),
        sc(
            "update_user",
            0.3,
            8,
            3.0,
            [
                ("gw_route", 1.0),
                ("auth_token", 0.5),
                ("user_load", 2.2),
                ("user_save", 3.0),
                ("notify_send", 0.6),
            ],
        ),
        sc(
            "rebook",
            0.3,
            6,
            2.5,
            [
                ("gw_route", 1.1),
                ("auth_token", 0.5),
                ("ticket_query", 2.4),
                ("route_plan", 1.8),
                ("train_info", 1.2),
                ("station_info", 1.0),
                ("price_quote", 0.9),
                ("order_update", 2.0),
                ("pay_charge", 1.5),
                ("ticket_hold", 0.8),
                ("notify_send", 0.6),
            ],
        ),
    )
    return ArchitectureModel(
        name="ttbs",
        components=components,
        nodes=nodes,
        links=links,
        scenarios=scenarios,
        deployment=deployment,
    )


def cocome():
    components = (
        comp("cashdesk", [("cd_sale_start", 0.004), ("cd_sale_finish", 0.008)], 0.0008, "xml"),
        comp("scanner", [("sc_read", 0.003)], 0.0004, "xml"),
        comp("printer", [("pr_print", 0.010)], 0.0006, "xml"),
        comp("carddealer", [("card_auth", 0.012)], 0.0012, "xml"),
        comp("lightdisplay", [("ld_show", 0.002)], 0.0003, "xml"),
        comp("coordinator", [("co_dispatch", 0.005)], 0.0007),
        comp("store", [("st_lookup", 0.009), ("st_update", 0.011)], 0.0010),
        comp("inventory", [("inv_check", 0.010), ("inv_reserve", 0.012)], 0.0011),
        comp("enterprise", [("ent_sync", 0.015)], 0.0014),
        comp("reporting", [("rep_build", 0.025)], 0.0016),
        comp("db", [("db_read", 0.006), ("db_write", 0.009)], 0.0009, "rows"),
        comp("bank_adapter", [("bank_charge", 0.018)], 0.0020, "iso8583"),
        comp("event_bus", [("bus_publish", 0.003)], 0.0005),
    )
    nodes = tuple(
        ProcNode(id=nid, speed_factor=s)
        for nid, s in [
            ("pos1", 1.0),
            ("pos2", 1.0),
            ("store_srv", 2.0),
            ("inv_srv", 1.5),
            ("ent_srv", 2.0),
            ("db_srv", 2.5),
            ("bank_gw", 1.0),
            ("bus_srv", 1.0),
        ]
    )
    deployment = {
        "cashdesk": "pos1",
        "scanner": "pos1",
        "printer": "pos1",
        "carddealer": "pos2",
        "lightdisplay": "pos2",
        "coordinator": "store_srv",
        "store": "store_srv",
        "inventory": "inv_srv",
        "enterprise": "ent_srv",
        "reporting": "ent_srv",
        "db": "db_srv",
        "bank_adapter": "bank_gw",
        "event_bus": "bus_srv",
    }
    links = tuple(
        Link(id=lid, endpoints=(a, b), failure_prob=psi)
        for lid, a, b, psi in [
            ("l1", "pos1", "store_srv", 0.0010),
            ("l2", "pos2", "store_srv", 0.0010),
            ("l3", "store_srv", "inv_srv", 0.0006),
            ("l4", "store_srv", "db_srv", 0.0006),
            ("l5", "inv_srv", "db_srv", 0.0006),
            ("l6", "ent_srv", "db_srv", 0.0006),
            ("l7", "pos2", "bank_gw", 0.0015),
            ("l8", "store_srv", "ent_srv", 0.0008),
            ("l9", "bus_srv", "store_srv", 0.0008),
            ("l10", "bus_srv", "ent_srv", 0.0008),
        ]
    )
    scenarios = (
        sc(
            "sale",
            0.6,
            15,
            1.5,
            [
                ("cd_sale_start", 0.5),
                ("sc_read", 0.3),
                ("st_lookup", 1.2),
                ("db_read", 2.0),
                ("ld_show", 0.2),
                ("card_auth", 0.8),
                ("bank_charge", 1.0),
                ("cd_sale_finish", 0.5),
                ("pr_print", 0.4),
                ("bus_publish", 0.3),
            ],
        ),
        sc(
            "restock",
            0.25,
            6,
            4.0,
            [
                ("co_dispatch", 0.5),
                ("inv_check", 1.5),
                ("db_read", 2.2),
                ("inv_reserve", 1.8),
                ("st_update", 1.4),
                ("db_write", 2.5),
                ("bus_publish", 0.3),
            ],
        ),
        sc(
            "report",
            0.15,
            3,
            8.0,
            [
                ("ent_sync", 2.8),
                ("db_read", 4.0),
                ("rep_build", 3.2),
                ("db_read", 3.6),
                ("rep_build", 2.4),
            ],
        ),
    )
    return ArchitectureModel(
        name="cocome",
        components=components,
        nodes=nodes,
        links=links,
        scenarios=scenarios,
        deployment=deployment,
    )


def hotspot():
    components = (
        comp("web", [("web_handle", 0.05), ("web_render", 0.04)], 0.0010),
        comp("app", [("app_work", 0.40), ("app_prep", 0.08)], 0.0050, "java"),
        comp("db", [("db_io", 0.10), ("db_tx", 0.07)], 0.0010, "rows"),
        comp("cache", [("cache_get", 0.02)], 0.0004),
        comp("auth", [("auth_check", 0.06)], 0.0030),
        comp("logger", [("log_write", 0.03)], 0.0008),
    )
    nodes = (
        ProcNode(id="n1"),
        ProcNode(id="n2"),
        ProcNode(id="n3"),
        ProcNode(id="n4", speed_factor=0.8),
        ProcNode(id="n5", speed_factor=1.2),
    )
    links = (
        Link(id="l12", endpoints=("n1", "n2"), failure_prob=0.0005),
        Link(id="l23", endpoints=("n2", "n3"), failure_prob=0.0005),
        Link(id="l24", endpoints=("n2", "n4"), failure_prob=0.0020),
        Link(id="l15", endpoints=("n1", "n5"), failure_prob=0.0010),
        Link(id="l25", endpoints=("n2", "n5"), failure_prob=0.0010),
    )
    scenarios = (
        sc(
            "browse",
            0.7,
            12,
            1.0,
            [
                ("web_handle", 1.0),
                ("auth_check", 0.4),
                ("app_work", 2.0),
                ("cache_get", 0.3),
                ("db_io", 1.5),
                ("app_work", 2.0),
                ("web_render", 1.2),
            ],
        ),
        sc(
            "checkout",
            0.3,
            6,
            2.0,
            [
                ("web_handle", 1.0),
                ("app_prep", 0.8),
                ("app_work", 2.5),
                ("db_tx", 1.8),
                ("log_write", 0.5),
            ],
        ),
    )
    return ArchitectureModel(
        name="hotspot",
        components=components,
        nodes=nodes,
        links=links,
        scenarios=scenarios,
        deployment={
            "web": "n1",
            "app": "n2",
            "db": "n3",
            "cache": "n4",
            "auth": "n5",
            "logger": "n4",
        },
    )


def blobby():
    components = (
        comp("alpha", [("a_step", 0.12)], 0.0010),
        comp("beta", [("b_step", 0.10)], 0.0010),
    )
    nodes = (ProcNode(id="na"), ProcNode(id="nb"))
    links = (Link(id="lab", endpoints=("na", "nb"), failure_prob=0.001),)
    steps = []
    for i in range(9):
        steps.append(("a_step" if i % 2 == 0 else "b_step", 0.5))
    scenarios = (sc("s1", 1.0, 1, 9.0, steps),)
    return ArchitectureModel(
        name="blobby",
        components=components,
        nodes=nodes,
        links=links,
        scenarios=scenarios,
        deployment={"alpha": "na", "beta": "nb"},
    )


if __name__ == "__main__":
    for build in (ttbs, cocome, hotspot, blobby):
        m = build()
        text = serialize(m)
        load_model(text)  # round-trip sanity
        path = f"src/archsteer/fixtures/{m.name}.arch"
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(path, len(m.components), "components", len(m.nodes), "nodes", len(m.scenarios), "scenarios")
