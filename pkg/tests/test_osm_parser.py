# -*- coding: utf-8 -*-

import io
import json

import pytest

from mapfusion.exceptions import OsmParseError
from mapfusion.mapgraph.osm_parser import OsmWay, detect_format, parse_osm

OSM_XML = b"""<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6">
  <node id="1" lat="51.7500" lon="-1.2500"/>
  <node id="2" lat="51.7501" lon="-1.2500"/>
  <node id="3" lat="51.7502" lon="-1.2500"/>
  <node id="4" lat="51.7600" lon="-1.2600"/>
  <node id="5" lat="51.7601" lon="-1.2600"/>
  <way id="10">
    <nd ref="1"/><nd ref="2"/><nd ref="3"/>
    <tag k="highway" v="primary"/>
    <tag k="lanes" v="6"/>
    <tag k="oneway" v="yes"/>
    <tag k="name" v="High Street"/>
  </way>
  <way id="11">
    <nd ref="4"/><nd ref="5"/>
    <tag k="building" v="yes"/>
  </way>
  <way id="12">
    <nd ref="4"/><nd ref="5"/>
    <tag k="highway" v="footway"/>
  </way>
</osm>
"""


def overpass(elements):
    return json.dumps({'version': 0.6, 'elements': elements}).encode('utf-8')


class TestXml:

    def test_keeps_only_road_ways(self):
        extract = parse_osm(OSM_XML)
        assert list(extract.ways) == [10]
        assert extract.ways[10].node_ids == [1, 2, 3]
        assert sorted(extract.nodes) == [1, 2, 3]

    def test_keeps_only_lane_and_oneway_tags(self):
        way = parse_osm(OSM_XML).ways[10]
        assert way.tags == {'lanes': '6', 'oneway': 'yes'}
        assert way.lane_count == 6

    def test_accepts_file_objects(self):
        assert len(parse_osm(io.BytesIO(OSM_XML))) == 1

    @pytest.mark.parametrize('document', [b'', b'   \n'])
    def test_empty_document_gives_empty_extract(self, document):
        extract = parse_osm(document)
        assert len(extract) == 0
        assert extract.nodes == {}

    def test_malformed_document_reports_offset(self):
        data = b'<osm>\n  <node id="1" lat="1" lon="1"\n</osm>'
        with pytest.raises(OsmParseError) as info:
            parse_osm(data)
        assert 0 < info.value.offset <= len(data)
        assert 'byte offset' in str(info.value)

    def test_way_with_missing_node_is_dropped_and_counted(self):
        data = OSM_XML.replace(b'<nd ref="3"/>', b'<nd ref="99"/>')
        extract = parse_osm(data)
        assert len(extract) == 0
        assert extract.dropped_ways == 1


class TestJson:

    def test_overpass_elements(self):
        data = overpass([
            {'type': 'node', 'id': 1, 'lat': 51.75, 'lon': -1.25},
            {'type': 'node', 'id': 2, 'lat': 51.7501, 'lon': -1.25},
            {'type': 'way', 'id': 7, 'nodes': [1, 2], 'tags': {'highway': 'residential',
                                                             'surface': 'asphalt'}},
            {'type': 'way', 'id': 8, 'nodes': [1, 2], 'tags': {'highway': 'cycleway'}},
        ])
        extract = parse_osm(data, 'json')
        assert list(extract.ways) == [7]
        assert extract.ways[7].tags == {}
        assert extract.ways[7].lane_count is None

    def test_malformed_json_reports_offset(self):
        data = b'{"elements": [ {"type": "node", }'
        with pytest.raises(OsmParseError) as info:
            parse_osm(data, 'json')
        assert info.value.offset == data.index(b'}')

    def test_non_object_document(self):
        with pytest.raises(OsmParseError):
            parse_osm(b'[1, 2]', 'json')

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            parse_osm(OSM_XML, 'pbf')


@pytest.mark.parametrize('raw, expected', [
    ('2', 2), ('2;3', 3), ('1.0', 1), ('many', None), ('0', None),
])
def test_lane_count_parsing(raw, expected):
    assert OsmWay([1, 2], {'lanes': raw}).lane_count == expected


def test_detect_format():
    assert detect_format('city.JSON') == 'json'
    assert detect_format('city.osm') == 'xml'
